#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fsasense/common.hpp"

namespace fsasense {

/**
 * Physical parameters of the coupled-resonator frequency-scanning antenna.
 *
 * The per-element phase delay is arctan(Q*(f0/f - f/f0)) plus a linear
 * asymmetry term kappa*(f - f0) that models residual imbalance between
 * the electric and magnetic inter-element coupling.
 */
struct AntennaConfig {
    int num_elements = 12;            // N
    double element_spacing = 0.0145;  // l, meters
    double resonant_freq = 5.57e9;    // f0, Hz
    double quality_factor = 200.0;    // Q
    double coupling_asymmetry = 0.0;  // kappa, rad/Hz

    void check() const; // throws InvalidInput on violated invariants
};

/// Intra-element resonator phase delay in radians; zero at f0, strictly
/// decreasing in f, bounded by (-pi/2, pi/2).
double resonator_phase(double freq_hz, const AntennaConfig& cfg);

/// Total per-element phase step: resonator phase plus coupling asymmetry.
double element_phase(double freq_hz, const AntennaConfig& cfg);

/// Main-beam direction in degrees for the given frequency.
/// Throws OutOfScanRange when the frequency does not form a main beam.
double beam_direction(double freq_hz, const AntennaConfig& cfg);

/// Normalized array gain in [0, 1] toward angle theta_deg at freq_hz.
/// Exactly 1 at theta = beam_direction(freq_hz).
double array_factor(double freq_hz, double theta_deg, const AntennaConfig& cfg);

/**
 * Calibrated bijection between subcarrier frequency and beam angle.
 *
 * Nodes are strictly increasing in frequency and strictly monotonic in
 * angle (either direction); queries interpolate piecewise-linearly and
 * node queries return the stored value exactly.
 */
class FrequencyAngleMap {
public:
    FrequencyAngleMap(std::vector<double> freqs_hz, std::vector<double> angles_deg,
                      std::string id = "map");

    std::size_t size() const { return freqs_.size(); }
    double freq_at(std::size_t i) const { return freqs_[i]; }
    double angle_at(std::size_t i) const { return angles_[i]; }
    const std::vector<double>& freqs() const { return freqs_; }
    const std::vector<double>& angles() const { return angles_; }
    const std::string& id() const { return id_; }

    double min_freq() const { return freqs_.front(); }
    double max_freq() const { return freqs_.back(); }
    double min_angle() const;
    double max_angle() const;
    /// max_angle - min_angle, degrees.
    double span_deg() const { return max_angle() - min_angle(); }

    /// Piecewise-linear angle for a frequency inside the map span.
    double angle_for_frequency(double freq_hz) const;
    /// Piecewise-linear frequency for an angle inside the map span.
    double frequency_for_angle(double angle_deg) const;
    /// Index of the node whose angle is closest to angle_deg.
    std::size_t nearest_index(double angle_deg) const;

    bool contains_angle(double angle_deg) const;

private:
    std::vector<double> freqs_;
    std::vector<double> angles_;
    std::string id_;
    bool ascending_ = true; // angle direction vs frequency
};

/// One map node per subcarrier, computed from the antenna model.
/// Throws OutOfScanRange listing every offending frequency.
FrequencyAngleMap build_frequency_angle_map(const AntennaConfig& cfg,
                                            std::span<const double> subcarrier_freqs);

/// Load a measured map from CSV (`frequency_hz,angle_deg`, header required,
/// rows sorted by frequency). Throws ParseError with the offending row.
FrequencyAngleMap load_calibration(const std::filesystem::path& path);

void save_calibration(const FrequencyAngleMap& map, const std::filesystem::path& path);

/// Gain samples on a (frequency x angle) grid, normalized to 1 per row.
struct BeamPatternGrid {
    std::vector<double> frequencies; // Hz, ascending
    std::vector<double> angles;      // degrees, ascending
    std::vector<double> gain;        // row-major [freq][angle], in [0, 1]

    double at(std::size_t fi, std::size_t ai) const { return gain[fi * angles.size() + ai]; }
};

/// Evaluate the array factor on a regular angle grid (default step 0.1 deg).
/// Parallel over frequencies.
BeamPatternGrid make_beam_pattern_grid(const AntennaConfig& cfg,
                                       std::span<const double> freqs_hz,
                                       double angle_lo_deg = -90.0,
                                       double angle_hi_deg = 90.0,
                                       double step_deg = 0.1);

/// n frequencies uniformly spanning [f_lo, f_hi], endpoints included.
std::vector<double> uniform_band(double f_lo, double f_hi, int n);

/// Wi-Fi channel 114 band used throughout: 5.49 to 5.65 GHz.
inline constexpr double kBandLo = 5.49e9;
inline constexpr double kBandHi = 5.65e9;
inline constexpr int kDefaultSubcarriers = 64;

/// Solve for the quality factor that makes the beam span over [f_lo, f_hi]
/// equal span_deg (bisection; span is strictly increasing in Q).
double tune_quality_factor(AntennaConfig cfg, double f_lo, double f_hi, double span_deg);

/// Antenna tuned so the default band maps to a 60 degree field of view
/// centered near boresight (N=12, l=14.5 mm, f0=5.57 GHz, Q from bisection).
const AntennaConfig& default_antenna();

/// Map over kDefaultSubcarriers subcarriers of the default band and antenna.
FrequencyAngleMap default_map();

} // namespace fsasense
