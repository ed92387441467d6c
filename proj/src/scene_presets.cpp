#include <cmath>

#include "fsasense/scene.hpp"

namespace fsasense {

namespace {

Vec2 polar(double distance_m, double angle_deg) {
    double a = deg_to_rad(angle_deg);
    return {distance_m * std::cos(a), distance_m * std::sin(a)};
}

Geometry geometry_with_separation(double separation_m) {
    Geometry g;
    g.tx = {0.0, 0.0};
    g.boresight_deg = 0.0;
    // rx pair sits beside the transmitter, outside the field of view
    g.rx[0] = {0.0, separation_m - 0.5 * kDefaultRxSeparation};
    g.rx[1] = {0.0, separation_m + 0.5 * kDefaultRxSeparation};
    return g;
}

std::vector<Reflector> indoor_clutter() {
    // LoS-like path toward the receivers plus wall and furniture bounces in
    // and out of the field of view. Static paths carry far more power than
    // a human reflection (tens of dB in practice), which keeps the rx ratio
    // away from deep denominator fades.
    return {
        {90.0, 0.0, 1.0},
        {-64.0, 1.1, 0.28},
        {-33.0, 4.6, 0.14},
        {-22.0, 3.5, 0.22},
        {-9.0, 6.1, 0.11},
        {3.0, 2.8, 0.25},
        {12.0, 5.0, 0.16},
        {21.0, 1.9, 0.19},
        {36.0, 7.4, 0.09},
        {58.0, 2.4, 0.31},
    };
}

Target radial_walker(double angle_deg, double start_distance_m, double speed_mps) {
    // moves along the ray at angle_deg; negative speed approaches the
    // transmitter, positive speed recedes
    Vec2 dir = polar(1.0, angle_deg);
    return Target{LinearMotion{polar(start_distance_m, angle_deg), dir * speed_mps}, 1.0};
}

Target breather(double angle_deg, double distance_m, double rate_bpm, double reflectivity = 1.0) {
    Breathing b;
    b.position = polar(distance_m, angle_deg);
    b.rate_bpm = rate_bpm;
    return Target{b, reflectivity};
}

Scenario base_scene(const std::string& id, std::uint64_t seed) {
    Scenario s;
    s.id = id;
    s.geometry = geometry_with_separation(1.0);
    s.reflectors = indoor_clutter();
    s.sample_rate = 200.0;
    s.snr_db = 20.0;
    s.offset_model = OffsetModel::per_packet_random;
    s.rng_seed = seed;
    return s;
}

} // namespace

Scenario preset_scenario(const std::string& name) {
    if (name == "benchmark_angles") {
        Scenario s = base_scene(name, 1);
        s.duration = 10.0;
        s.targets = {radial_walker(0.0, 2.5, -0.10)}; // 1 m approach at 10 cm/s
        return s;
    }
    if (name == "benchmark_distance") {
        Scenario s = base_scene(name, 1);
        s.duration = 10.0;
        // recedes so the labeled distance is the closest approach; a track
        // at 1 m cannot slide the target into the antenna
        s.targets = {radial_walker(0.0, 3.0, 0.10)};
        // headroom so the 5 m point keeps slow motion above the noise floor
        s.snr_db = 28.0;
        return s;
    }
    if (name == "benchmark_separation") {
        Scenario s = base_scene(name, 1);
        s.duration = 10.0;
        s.targets = {radial_walker(0.0, 2.5, -0.10)};
        // headroom for the 3 m receiver placement
        s.snr_db = 25.0;
        return s;
    }
    if (name == "living_room_multitarget") {
        Scenario s = base_scene(name, 2);
        s.duration = 60.0;
        s.targets = {
            breather(-20.0, 2.2, 12.0),
            breather(0.0, 2.4, 15.0),
            breather(20.0, 2.2, 18.0),
        };
        return s;
    }
    if (name == "fan_interference") {
        Scenario s = base_scene(name, 3);
        s.duration = 60.0;
        s.targets = {breather(15.0, 2.2, 14.0)};
        // oscillating fan: slow sweep, strong reflector, 30 degrees away
        s.targets.push_back(
            Target{Oscillation{polar(1.8, -15.0), polar(1.0, -15.0), 0.03, 8.0}, 6.0});
        return s;
    }
    if (name == "bedroom") {
        Scenario s = base_scene(name, 4);
        s.duration = 32.0;
        s.targets = {breather(20.0, 2.3, 16.0)};
        // cat on a tower and a second person shifting at a desk
        s.targets.push_back(
            Target{Oscillation{polar(2.0, -25.0), polar(1.0, -25.0), 0.05, 5.0}, 1.5});
        s.targets.push_back(
            Target{Oscillation{polar(2.8, -5.0), polar(1.0, -5.0), 0.01, 6.0}, 1.0});
        return s;
    }
    throw InvalidInput("unknown scenario preset '" + name + "'");
}

std::vector<std::string> preset_scenario_names() {
    return {"benchmark_angles",       "benchmark_distance", "benchmark_separation",
            "living_room_multitarget", "fan_interference",   "bedroom"};
}

} // namespace fsasense
