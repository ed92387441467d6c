#include "fsasense/scene.hpp"

#include <cmath>
#include <sstream>

namespace fsasense {

static const Target& target_at(const Scenario& s, std::size_t idx) {
    if (idx >= s.targets.size())
        throw InvalidInput("target index " + std::to_string(idx) + " out of range (scene has " +
                           std::to_string(s.targets.size()) + " targets)");
    return s.targets[idx];
}

static void check_time(const Scenario& s, double t) {
    if (t < 0.0 || t > s.duration)
        throw InvalidInput("time " + std::to_string(t) + " s outside [0, " +
                           std::to_string(s.duration) + "]");
}

Vec2 target_position(const Scenario& s, std::size_t target_index, double t) {
    check_time(s, t);
    const Trajectory& traj = target_at(s, target_index).trajectory;
    if (const auto* lin = std::get_if<LinearMotion>(&traj)) {
        return lin->start + lin->velocity * t;
    }
    if (const auto* osc = std::get_if<Oscillation>(&traj)) {
        Vec2 axis = normalized(osc->axis);
        double phase = 2.0 * kPi * t / osc->period;
        return osc->center + axis * (osc->amplitude * std::sin(phase));
    }
    if (const auto* br = std::get_if<Breathing>(&traj)) {
        Vec2 ray = br->position - s.geometry.tx;
        Vec2 dir = ray.norm() > 0.0 ? normalized(ray) : Vec2{1.0, 0.0};
        double phase = 2.0 * kPi * (br->rate_bpm / 60.0) * t;
        return br->position + dir * (br->displacement_amplitude * std::sin(phase));
    }
    return std::get<Stationary>(traj).position;
}

double target_angle_at(const Scenario& s, std::size_t target_index, double t) {
    Vec2 p = target_position(s, target_index, t);
    Vec2 d = p - s.geometry.tx;
    if (d.norm() == 0.0) throw InvalidInput("target coincides with the transmitter");
    double world = rad_to_deg(std::atan2(d.y, d.x));
    return wrap_deg(world - s.geometry.boresight_deg);
}

double dynamic_path_length(const Scenario& s, std::size_t target_index, int rx_index, double t) {
    if (rx_index < 0 || rx_index > 1) throw InvalidInput("rx index must be 0 or 1");
    Vec2 p = target_position(s, target_index, t);
    return distance(s.geometry.tx, p) + distance(p, s.geometry.rx[rx_index]);
}

double target_amplitude(const Scenario& s, std::size_t target_index, int rx_index, double t) {
    double d = dynamic_path_length(s, target_index, rx_index, t);
    double refl = target_at(s, target_index).reflectivity;
    return refl / std::pow(std::max(d, 1e-3), s.falloff_exponent);
}

double resolved_noise_sigma(const Scenario& s) {
    if (!s.snr_db) return s.noise_sigma;
    if (s.targets.empty())
        throw InvalidInput("snr_db requires at least one target to reference");
    double a = target_amplitude(s, 0, 0, 0.0);
    return a * std::pow(10.0, -(*s.snr_db) / 20.0);
}

ValidationReport validate(const Scenario& s, const FrequencyAngleMap* fov) {
    ValidationReport rep;
    auto err = [&rep](const std::string& m) { rep.errors.push_back(m); };
    auto warn = [&rep](const std::string& m) { rep.warnings.push_back(m); };

    if (!(s.duration > 0.0)) err("duration must be > 0 s");
    if (!(s.sample_rate > 0.0)) err("sample_rate must be > 0 Hz");
    if (s.noise_sigma < 0.0) err("noise_sigma must be >= 0");
    if (s.snr_db && s.targets.empty()) err("snr_db set but the scene has no targets");
    if (!(s.falloff_exponent >= 0.0)) err("falloff_exponent must be >= 0");

    if (distance(s.geometry.rx[0], s.geometry.rx[1]) == 0.0)
        err("the two rx positions must be distinct");

    for (std::size_t i = 0; i < s.reflectors.size(); ++i) {
        const Reflector& r = s.reflectors[i];
        if (r.amplitude < 0.0) err("reflector " + std::to_string(i) + ": amplitude must be >= 0");
        if (r.excess_path < 0.0) err("reflector " + std::to_string(i) + ": excess_path must be >= 0");
    }

    for (std::size_t i = 0; i < s.targets.size(); ++i) {
        const Target& tgt = s.targets[i];
        std::string tag = "target " + std::to_string(i) + ": ";
        if (!(tgt.reflectivity > 0.0)) err(tag + "reflectivity must be > 0");
        if (const auto* osc = std::get_if<Oscillation>(&tgt.trajectory)) {
            if (!(osc->amplitude > 0.0)) err(tag + "oscillation amplitude must be > 0");
            if (!(osc->period > 0.0)) err(tag + "oscillation period must be > 0");
            double n = osc->axis.norm();
            if (n == 0.0)
                err(tag + "oscillation axis must be nonzero");
            else if (std::abs(n - 1.0) > 1e-6)
                warn(tag + "oscillation axis is not unit length; it will be normalized");
        } else if (const auto* br = std::get_if<Breathing>(&tgt.trajectory)) {
            if (!(br->displacement_amplitude > 0.0))
                err(tag + "breathing displacement amplitude must be > 0");
            if (!(br->rate_bpm > 0.0 && br->rate_bpm <= 60.0))
                err(tag + "breathing rate must be in (0, 60] bpm");
        }
    }

    if (!rep.ok()) return rep;

    if (fov != nullptr) {
        std::size_t n = s.num_samples();
        double dt = 1.0 / s.sample_rate;
        for (std::size_t i = 0; i < s.targets.size(); ++i) {
            for (std::size_t k = 0; k < n; ++k) {
                double t = std::min(k * dt, s.duration);
                double ang = target_angle_at(s, i, t);
                if (!fov->contains_angle(ang)) {
                    std::ostringstream os;
                    os << "target " << i << " leaves the field of view at t=" << t << " s (angle "
                       << ang << " deg, FoV [" << fov->min_angle() << ", " << fov->max_angle()
                       << "])";
                    warn(os.str());
                    break;
                }
            }
        }
    }
    return rep;
}

} // namespace fsasense
