#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fsasense/dispersion.hpp"
#include "fsasense/pipeline.hpp"

namespace fsasense {

/// Default circular-variance ceiling above which a window is declared
/// motion-free. Pure-noise windows sit near 0.94, so anything below keeps
/// the >= 0.99 rejection probability; see estimate_direction.
inline constexpr double kNoMotionThreshold = 0.4;

struct DirectionEstimate {
    double window_start = 0.0;
    double angle_deg = 0.0;
    int subcarrier_index = -1;
    double score_margin = 0.0; // best ssnr_score minus runner-up
    bool valid = false;
};

/**
 * Pick the subcarrier with the smallest mean circular variance and map it
 * to an angle. Returns valid == false when even the best variance exceeds
 * no_motion_threshold (no moving target). Exact ties go to the subcarrier
 * nearest the previous estimate when one is given, otherwise to the lowest
 * frequency.
 */
DirectionEstimate estimate_direction(const SsnrProfile& profile, const FrequencyAngleMap& map,
                                     double no_motion_threshold = kNoMotionThreshold,
                                     const std::optional<DirectionEstimate>& previous = {});

/// One estimate per analysis window over the whole trace.
std::vector<DirectionEstimate> track_direction(const CsiTrace& trace, const FrequencyAngleMap& map,
                                               const PipelineConfig& cfg,
                                               double no_motion_threshold = kNoMotionThreshold);

std::vector<DirectionEstimate> track_direction(const RatioTrace& ratio,
                                               const FrequencyAngleMap& map,
                                               const PipelineConfig& cfg,
                                               double no_motion_threshold = kNoMotionThreshold);

/// Named angular sectors, disjoint, [lo, hi) degrees.
struct RegionSpec {
    struct Sector {
        std::string label;
        double lo_deg = 0.0;
        double hi_deg = 0.0;
    };
    std::vector<Sector> sectors;

    void check(const FrequencyAngleMap* fov = nullptr) const;
    std::optional<std::string> sector_of(double angle_deg) const;
};

enum class RegionRule { majority, last_valid };

/// Sector label for a walk, or nullopt when no valid estimate falls in a
/// sector. majority = modal sector over valid estimates; last_valid =
/// sector of the final valid estimate.
std::optional<std::string> classify_region(std::span<const DirectionEstimate> estimates,
                                           const RegionSpec& spec, RegionRule rule);

/**
 * Motion waveform for one direction: nearest subcarrier of the ratio
 * trace, 10 s sliding-mean static removal, principal-axis I-Q projection,
 * zero-phase band-pass to the breathing band.
 */
std::vector<double> extract_waveform(const RatioTrace& ratio, const FrequencyAngleMap& map,
                                     double direction_deg, double band_lo_bpm = 6.0,
                                     double band_hi_bpm = 30.0);

struct RateEstimate {
    double bpm = 0.0;
    bool valid = false;
};

/**
 * Breathing rate from a waveform of at least 30 s: periodogram over
 * [0.1, 0.5] Hz, three-bin parabolic peak interpolation. The peak counts
 * as breathing only when it rises at least 3x above the median band power
 * and the band energy concentrates around it.
 */
RateEstimate respiration_rate(std::span<const double> waveform, double sample_rate);

struct RespirationResult {
    double direction_deg = 0.0;
    std::vector<double> waveform;
    double rate_bpm = 0.0;
    bool valid = false;
};

/// extract_waveform + respiration_rate per direction; a failure in one
/// direction yields an invalid result there without aborting the others.
/// Directions closer than min_separation_deg (about one beamwidth of the
/// default antenna) are flagged into *warnings when given.
std::vector<RespirationResult> multi_target_respiration(const CsiTrace& trace,
                                                        const FrequencyAngleMap& map,
                                                        std::span<const double> directions_deg,
                                                        double min_separation_deg = 15.0,
                                                        std::vector<std::string>* warnings = nullptr);

/// CSV columns: window_start,angle_deg,subcarrier,score_margin,valid
void write_estimates_csv(std::span<const DirectionEstimate> estimates,
                         const std::filesystem::path& path);

} // namespace fsasense
