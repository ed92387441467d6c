#include "fsasense/dispersion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fsasense {

void AntennaConfig::check() const {
    if (num_elements < 2) throw InvalidInput("num_elements must be >= 2");
    if (!(element_spacing > 0.0)) throw InvalidInput("element_spacing must be > 0");
    if (!(resonant_freq > 0.0)) throw InvalidInput("resonant_freq must be > 0");
    if (quality_factor < 0.0) throw InvalidInput("quality_factor must be >= 0");
}

static void check_freq(double f) {
    if (!(f > 0.0)) throw InvalidInput("frequency must be > 0 Hz");
}

double resonator_phase(double freq_hz, const AntennaConfig& cfg) {
    check_freq(freq_hz);
    return std::atan(cfg.quality_factor * (cfg.resonant_freq / freq_hz - freq_hz / cfg.resonant_freq));
}

double element_phase(double freq_hz, const AntennaConfig& cfg) {
    return resonator_phase(freq_hz, cfg) + cfg.coupling_asymmetry * (freq_hz - cfg.resonant_freq);
}

double beam_direction(double freq_hz, const AntennaConfig& cfg) {
    double lambda = kSpeedOfLight / freq_hz;
    double arg = -lambda * element_phase(freq_hz, cfg) / (2.0 * kPi * cfg.element_spacing);
    if (arg < -1.0 || arg > 1.0) {
        std::ostringstream os;
        os << "frequency " << freq_hz << " Hz is outside the scan range (sin argument " << arg << ")";
        throw OutOfScanRange(os.str());
    }
    return rad_to_deg(std::asin(arg));
}

double array_factor(double freq_hz, double theta_deg, const AntennaConfig& cfg) {
    check_freq(freq_hz);
    int n = cfg.num_elements;
    if (n <= 1) return 1.0;
    double lambda = kSpeedOfLight / freq_hz;
    double psi = element_phase(freq_hz, cfg) +
                 2.0 * kPi * cfg.element_spacing * std::sin(deg_to_rad(theta_deg)) / lambda;
    // |sum_{k=0..n-1} e^{j k psi}| / n = |sin(n psi / 2) / (n sin(psi / 2))|
    double half = 0.5 * wrap_rad(psi);
    if (std::abs(std::sin(half)) < 1e-12) return 1.0;
    double g = std::abs(std::sin(n * half) / (n * std::sin(half)));
    return std::min(g, 1.0);
}

// ---------------------------------------------------------------------------
// FrequencyAngleMap

FrequencyAngleMap::FrequencyAngleMap(std::vector<double> freqs_hz, std::vector<double> angles_deg,
                                     std::string id)
    : freqs_(std::move(freqs_hz)), angles_(std::move(angles_deg)), id_(std::move(id)) {
    if (freqs_.size() != angles_.size())
        throw InvalidInput("frequency and angle lists differ in length");
    if (freqs_.empty())
        throw InvalidInput("a frequency-angle map needs at least 1 entry");
    ascending_ = freqs_.size() < 2 || angles_[1] > angles_[0];
    for (std::size_t i = 1; i < freqs_.size(); ++i) {
        if (!(freqs_[i] > freqs_[i - 1]))
            throw InvalidInput("map frequencies must be strictly increasing");
        bool up = angles_[i] > angles_[i - 1];
        if (angles_[i] == angles_[i - 1] || up != ascending_)
            throw InvalidInput("map angles must be strictly monotonic in frequency");
    }
    for (double a : angles_) {
        if (!(a > -90.0 && a < 90.0))
            throw InvalidInput("map angles must lie within (-90, 90) degrees");
    }
}

double FrequencyAngleMap::min_angle() const {
    return ascending_ ? angles_.front() : angles_.back();
}

double FrequencyAngleMap::max_angle() const {
    return ascending_ ? angles_.back() : angles_.front();
}

bool FrequencyAngleMap::contains_angle(double angle_deg) const {
    return angle_deg >= min_angle() && angle_deg <= max_angle();
}

double FrequencyAngleMap::angle_for_frequency(double freq_hz) const {
    if (freq_hz < freqs_.front() || freq_hz > freqs_.back()) {
        std::ostringstream os;
        os << "frequency " << freq_hz << " Hz outside map span [" << freqs_.front() << ", "
           << freqs_.back() << "]";
        throw OutOfFov(os.str());
    }
    auto it = std::lower_bound(freqs_.begin(), freqs_.end(), freq_hz);
    std::size_t hi = static_cast<std::size_t>(it - freqs_.begin());
    if (hi < freqs_.size() && freqs_[hi] == freq_hz) return angles_[hi]; // node hit, exact
    std::size_t lo = hi - 1;
    double t = (freq_hz - freqs_[lo]) / (freqs_[hi] - freqs_[lo]);
    return angles_[lo] + t * (angles_[hi] - angles_[lo]);
}

double FrequencyAngleMap::frequency_for_angle(double angle_deg) const {
    if (!contains_angle(angle_deg)) {
        std::ostringstream os;
        os << "angle " << angle_deg << " deg outside field of view [" << min_angle() << ", "
           << max_angle() << "]";
        throw OutOfFov(os.str());
    }
    // angles are strictly monotonic along the frequency axis
    for (std::size_t i = 0; i < angles_.size(); ++i)
        if (angles_[i] == angle_deg) return freqs_[i];
    std::size_t lo = 0;
    for (std::size_t i = 1; i < angles_.size(); ++i) {
        bool between = ascending_ ? (angles_[i - 1] < angle_deg && angle_deg < angles_[i])
                                  : (angles_[i] < angle_deg && angle_deg < angles_[i - 1]);
        if (between) {
            lo = i - 1;
            break;
        }
    }
    double t = (angle_deg - angles_[lo]) / (angles_[lo + 1] - angles_[lo]);
    return freqs_[lo] + t * (freqs_[lo + 1] - freqs_[lo]);
}

std::size_t FrequencyAngleMap::nearest_index(double angle_deg) const {
    std::size_t best = 0;
    double best_d = std::abs(angles_[0] - angle_deg);
    for (std::size_t i = 1; i < angles_.size(); ++i) {
        double d = std::abs(angles_[i] - angle_deg);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

FrequencyAngleMap build_frequency_angle_map(const AntennaConfig& cfg,
                                            std::span<const double> subcarrier_freqs) {
    cfg.check();
    if (subcarrier_freqs.size() < 1) throw InvalidInput("no subcarrier frequencies given");
    std::vector<double> freqs(subcarrier_freqs.begin(), subcarrier_freqs.end());
    std::vector<double> angles;
    angles.reserve(freqs.size());
    std::string offenders;
    for (double f : freqs) {
        try {
            angles.push_back(beam_direction(f, cfg));
        } catch (const OutOfScanRange&) {
            offenders += (offenders.empty() ? "" : ", ") + std::to_string(f);
        }
    }
    if (!offenders.empty())
        throw OutOfScanRange("subcarriers outside the scan range: " + offenders + " Hz");
    return FrequencyAngleMap(std::move(freqs), std::move(angles), "synthetic");
}

FrequencyAngleMap load_calibration(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open calibration file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ParseError("calibration file is empty: " + path.string());
    // tolerate UTF-8 BOM and whitespace in the header
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    std::string header = line;
    header.erase(std::remove_if(header.begin(), header.end(),
                                [](unsigned char c) { return std::isspace(c); }),
                 header.end());
    if (header != "frequency_hz,angle_deg")
        throw ParseError("row 1: expected header 'frequency_hz,angle_deg', got '" + line + "'");

    std::vector<double> freqs, angles;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        std::istringstream ss(line);
        std::string a, b, extra;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ','))
            throw ParseError("row " + std::to_string(row) + ": expected 'frequency_hz,angle_deg'");
        if (std::getline(ss, extra, ',') && !extra.empty())
            throw ParseError("row " + std::to_string(row) + ": too many columns");
        try {
            std::size_t pos = 0;
            double f = std::stod(a, &pos);
            double ang = std::stod(b, &pos);
            freqs.push_back(f);
            angles.push_back(ang);
        } catch (const std::exception&) {
            throw ParseError("row " + std::to_string(row) + ": malformed number in '" + line + "'");
        }
        std::size_t n = freqs.size();
        if (n >= 2 && !(freqs[n - 1] > freqs[n - 2]))
            throw ParseError("row " + std::to_string(row) + ": frequencies not strictly increasing");
    }
    if (freqs.size() < 2)
        throw ParseError("calibration file needs at least 2 data rows, got " +
                         std::to_string(freqs.size()));
    try {
        return FrequencyAngleMap(std::move(freqs), std::move(angles), path.filename().string());
    } catch (const InvalidInput& e) {
        throw ParseError(std::string("calibration file invalid: ") + e.what());
    }
}

void save_calibration(const FrequencyAngleMap& map, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write calibration file: " + path.string());
    out << "frequency_hz,angle_deg\n";
    out.precision(12);
    for (std::size_t i = 0; i < map.size(); ++i)
        out << map.freq_at(i) << "," << map.angle_at(i) << "\n";
}

BeamPatternGrid make_beam_pattern_grid(const AntennaConfig& cfg, std::span<const double> freqs_hz,
                                       double angle_lo_deg, double angle_hi_deg, double step_deg) {
    cfg.check();
    if (!(step_deg > 0.0) || !(angle_hi_deg > angle_lo_deg))
        throw InvalidInput("bad angle grid");
    BeamPatternGrid grid;
    grid.frequencies.assign(freqs_hz.begin(), freqs_hz.end());
    int n_angles = static_cast<int>(std::floor((angle_hi_deg - angle_lo_deg) / step_deg)) + 1;
    grid.angles.resize(n_angles);
    for (int i = 0; i < n_angles; ++i) grid.angles[i] = angle_lo_deg + i * step_deg;
    grid.gain.resize(grid.frequencies.size() * grid.angles.size());

    const auto nf = static_cast<std::ptrdiff_t>(grid.frequencies.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t fi = 0; fi < nf; ++fi) {
        double* row = grid.gain.data() + fi * n_angles;
        double f = grid.frequencies[fi];
        double peak = 0.0;
        for (int ai = 0; ai < n_angles; ++ai) {
            row[ai] = array_factor(f, grid.angles[ai], cfg);
            peak = std::max(peak, row[ai]);
        }
        if (peak > 0.0)
            for (int ai = 0; ai < n_angles; ++ai) row[ai] /= peak;
    }
    return grid;
}

std::vector<double> uniform_band(double f_lo, double f_hi, int n) {
    if (n < 1 || !(f_hi > f_lo)) throw InvalidInput("bad band specification");
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = 0.5 * (f_lo + f_hi);
        return out;
    }
    for (int i = 0; i < n; ++i) out[i] = f_lo + (f_hi - f_lo) * i / (n - 1);
    return out;
}

double tune_quality_factor(AntennaConfig cfg, double f_lo, double f_hi, double span_deg) {
    auto span = [&](double q) {
        cfg.quality_factor = q;
        return beam_direction(f_hi, cfg) - beam_direction(f_lo, cfg);
    };
    double lo = 0.0, hi = 1.0;
    while (span(hi) < span_deg) {
        hi *= 2.0;
        if (hi > 1e7) throw InvalidInput("span target unreachable for this geometry");
    }
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (span(mid) < span_deg) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

const AntennaConfig& default_antenna() {
    static const AntennaConfig cfg = [] {
        AntennaConfig c;
        c.num_elements = 12;
        c.element_spacing = 0.0145;
        c.resonant_freq = 5.57e9;
        c.coupling_asymmetry = 0.0;
        c.quality_factor = tune_quality_factor(c, kBandLo, kBandHi, 60.0);
        return c;
    }();
    return cfg;
}

FrequencyAngleMap default_map() {
    auto freqs = uniform_band(kBandLo, kBandHi, kDefaultSubcarriers);
    return build_frequency_angle_map(default_antenna(), freqs);
}

} // namespace fsasense
