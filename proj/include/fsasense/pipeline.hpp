#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "fsasense/channel.hpp"
#include "fsasense/common.hpp"

namespace fsasense {

/// Elementwise H_rx0 / H_rx1 on the trace grid. Samples whose denominator
/// magnitude falls below 1e-9 of the trace RMS carry valid == 0.
/// denom_floor records a per-subcarrier 5th-percentile denominator
/// magnitude: subcarriers whose rx1 channel passes through a deep fade
/// produce unreliable ratios, and consumers can prefer healthier ones.
struct RatioTrace {
    double sample_rate = 200.0;
    std::vector<double> subcarrier_freqs;
    std::vector<cplx> ratio;          // [t][f]
    std::vector<std::uint8_t> valid;  // [t][f]
    std::vector<double> denom_floor;  // [f]
    std::size_t num_times = 0;
    TraceMeta meta;

    std::size_t num_subcarriers() const { return subcarrier_freqs.size(); }
    cplx at(std::size_t t, std::size_t f) const { return ratio[t * num_subcarriers() + f]; }
    bool valid_at(std::size_t t, std::size_t f) const { return valid[t * num_subcarriers() + f] != 0; }
};

struct PipelineConfig {
    std::vector<double> intervals;   // TD-CSI lags in seconds
    double window_length = 1.0;      // s
    double window_hop = 0.5;         // s
    double epsilon = 1e-12;          // stabilizer for the log score

    /// 20 lags, 1..20 samples (5 ms to 100 ms at 200 Hz).
    static PipelineConfig defaults(double sample_rate = 200.0);

    /// Every lag must be a positive integer number of samples and the window
    /// must cover at least twice the longest lag.
    void check(double sample_rate) const;
    std::vector<int> interval_samples(double sample_rate) const;
};

/// Per-subcarrier motion scores for one analysis window. Lower circular
/// variance means a more stable phase progression, i.e. a higher
/// sensing-signal-to-noise ratio; ssnr_score = -log10(eps + variance).
struct SsnrProfile {
    double window_start = 0.0;
    std::vector<double> subcarrier_freqs;
    std::vector<double> mean_circular_variance; // in [0, 1]
    std::vector<double> ssnr_score;
    std::vector<std::uint8_t> valid;

    /// Index of the valid subcarrier with the smallest variance, or npos.
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::size_t best_subcarrier() const;
};

RatioTrace csi_ratio(const CsiTrace& trace);

/// out[k] = series[k + dt_samples] - series[k]; removes the static
/// channel component exactly.
std::vector<cplx> td_csi(std::span<const cplx> series, int dt_samples);

/// Circular variance (1 minus resultant length) of the wrapped phase
/// differences between consecutive samples. Requires >= 3 samples with
/// nonzero magnitude; an optional mask drops flagged samples first.
double phase_stability(std::span<const cplx> td_series,
                       std::span<const std::uint8_t> valid = {});

/// Profile of one window starting at window_start seconds: per subcarrier,
/// the mean circular variance across all configured TD lags. Subcarriers
/// with too few valid samples at every lag come back with valid == 0.
/// Parallel over subcarriers.
SsnrProfile ssnr_profile(const RatioTrace& ratio, const PipelineConfig& cfg, double window_start);

/// Window start times covering the trace at the configured hop.
std::vector<double> window_starts(const RatioTrace& ratio, const PipelineConfig& cfg);

/// CSV columns: window_start,subcarrier_index,freq_hz,mean_circ_variance,ssnr_score
void write_profiles_csv(std::span<const SsnrProfile> profiles,
                        const std::filesystem::path& path);

} // namespace fsasense
