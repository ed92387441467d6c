#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fsasense/common.hpp"
#include "fsasense/dispersion.hpp"
#include "fsasense/scene.hpp"

namespace fsasense {

/// Directional gain D(f, theta) used by the synthesizer.
class GainModel {
public:
    virtual ~GainModel() = default;
    virtual double gain(double freq_hz, double theta_deg) const = 0;
    virtual std::string id() const = 0;
    /// Throws when a subcarrier cannot be radiated by this model.
    virtual void check_subcarriers(std::span<const double> freqs_hz) const {
        (void)freqs_hz;
    }
};

/// Ideal array factor of a frequency-scanning antenna configuration.
class ArrayFactorGain final : public GainModel {
public:
    explicit ArrayFactorGain(AntennaConfig cfg) : cfg_(cfg) { cfg_.check(); }
    double gain(double freq_hz, double theta_deg) const override {
        return array_factor(freq_hz, theta_deg, cfg_);
    }
    std::string id() const override { return "fsa"; }
    void check_subcarriers(std::span<const double> freqs_hz) const override;
    const AntennaConfig& config() const { return cfg_; }

private:
    AntennaConfig cfg_;
};

/// Bilinear interpolation over a precomputed beam pattern grid.
class GridGain final : public GainModel {
public:
    explicit GridGain(BeamPatternGrid grid);
    double gain(double freq_hz, double theta_deg) const override;
    std::string id() const override { return "grid"; }
    void check_subcarriers(std::span<const double> freqs_hz) const override;

private:
    BeamPatternGrid grid_;
};

/// D == 1 everywhere; the omnidirectional comparison antenna.
class OmniGain final : public GainModel {
public:
    double gain(double, double) const override { return 1.0; }
    std::string id() const override { return "omni"; }
};

struct TraceMeta {
    std::string scenario_id;
    std::uint64_t seed = 0;
    std::string map_id;
};

/// Complex CSI samples on a uniform (time x subcarrier x rx) grid.
class CsiTrace {
public:
    CsiTrace() = default;
    CsiTrace(double sample_rate, std::vector<double> subcarrier_freqs, std::size_t num_times,
             TraceMeta meta);

    std::size_t num_times() const { return nt_; }
    std::size_t num_subcarriers() const { return freqs_.size(); }
    double sample_rate() const { return sample_rate_; }
    double time_at(std::size_t t) const { return static_cast<double>(t) / sample_rate_; }
    const std::vector<double>& subcarrier_freqs() const { return freqs_; }
    const TraceMeta& meta() const { return meta_; }
    TraceMeta& meta() { return meta_; }

    cplx& at(std::size_t t, std::size_t f, int rx) {
        return samples_[(t * freqs_.size() + f) * 2 + static_cast<std::size_t>(rx)];
    }
    const cplx& at(std::size_t t, std::size_t f, int rx) const {
        return samples_[(t * freqs_.size() + f) * 2 + static_cast<std::size_t>(rx)];
    }
    std::vector<cplx>& samples() { return samples_; }
    const std::vector<cplx>& samples() const { return samples_; }

    /// All samples finite (the CsiTrace invariant); throws on violation.
    void check_finite() const;

private:
    double sample_rate_ = 200.0;
    std::vector<double> freqs_;
    std::size_t nt_ = 0;
    std::vector<cplx> samples_; // [t][f][rx], rx fastest
    TraceMeta meta_;
};

/**
 * Synthesize a two-rx CSI trace for a validated scenario.
 *
 * Per (rx, f, t):
 *   H = sum_reflectors a_k D(f, theta_k) exp(-j 2 pi d_k / lambda_f)
 *     + sum_targets   D(f, theta_d(t)) A(t) exp(-j 2 pi d_rx(t) / lambda_f)
 *     + noise
 * with circular complex Gaussian noise of std resolved_noise_sigma(s) and,
 * when offset_model is per-packet-random, a common per-packet phase factor
 * applied to both rx. Bit-identical for a fixed (scenario, seed) regardless
 * of thread count; packets are parallelized over independent substreams.
 */
CsiTrace synthesize(const Scenario& s, const GainModel& gain,
                    std::span<const double> subcarrier_freqs);

/// synthesize() with D == 1 for all (f, theta).
CsiTrace omnidirectional_baseline(const Scenario& s, std::span<const double> subcarrier_freqs);

// CSV columns: t,subcarrier_index,freq_hz,rx,real,imag. The JSON sidecar
// carries scenario id, seed, map id, sample rate and the subcarrier list.
void write_trace_csv(const CsiTrace& trace, const std::filesystem::path& csv_path);
void write_trace_meta(const CsiTrace& trace, const std::filesystem::path& json_path);
CsiTrace read_trace_csv(const std::filesystem::path& csv_path,
                        const std::filesystem::path& json_path);

} // namespace fsasense
