#include "fsasense/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace fsasense {

PipelineConfig PipelineConfig::defaults(double sample_rate) {
    PipelineConfig cfg;
    cfg.intervals.resize(20);
    for (int k = 1; k <= 20; ++k) cfg.intervals[k - 1] = k / sample_rate;
    return cfg;
}

std::vector<int> PipelineConfig::interval_samples(double sample_rate) const {
    std::vector<int> out;
    out.reserve(intervals.size());
    for (double dt : intervals) {
        double n = dt * sample_rate;
        int ni = static_cast<int>(std::lround(n));
        if (ni < 1 || std::abs(n - ni) > 1e-6)
            throw InvalidInput("interval " + std::to_string(dt) +
                               " s is not a positive integer multiple of the sample period");
        out.push_back(ni);
    }
    return out;
}

void PipelineConfig::check(double sample_rate) const {
    if (intervals.empty()) throw InvalidInput("interval list is empty");
    auto ns = interval_samples(sample_rate);
    int max_n = *std::max_element(ns.begin(), ns.end());
    if (window_length < 2.0 * max_n / sample_rate)
        throw InvalidInput("window_length must cover at least twice the longest interval");
    if (!(window_hop > 0.0)) throw InvalidInput("window_hop must be > 0");
    if (!(epsilon > 0.0)) throw InvalidInput("epsilon must be > 0");
}

std::size_t SsnrProfile::best_subcarrier() const {
    std::size_t best = npos;
    double best_v = 0.0;
    for (std::size_t i = 0; i < mean_circular_variance.size(); ++i) {
        if (!valid[i]) continue;
        if (best == npos || mean_circular_variance[i] < best_v) {
            best = i;
            best_v = mean_circular_variance[i];
        }
    }
    return best;
}

RatioTrace csi_ratio(const CsiTrace& trace) {
    if (trace.num_times() == 0 || trace.num_subcarriers() == 0)
        throw InvalidInput("empty trace");

    // flag denominators below 1e-9 of the trace RMS
    double power = 0.0;
    for (const cplx& v : trace.samples()) power += std::norm(v);
    double rms = std::sqrt(power / static_cast<double>(trace.samples().size()));
    double floor = 1e-9 * rms;

    RatioTrace out;
    out.sample_rate = trace.sample_rate();
    out.subcarrier_freqs = trace.subcarrier_freqs();
    out.num_times = trace.num_times();
    out.meta = trace.meta();
    out.ratio.resize(trace.num_times() * trace.num_subcarriers());
    out.valid.resize(out.ratio.size());
    out.denom_floor.resize(trace.num_subcarriers());
    std::vector<double> mags(trace.num_times());
    for (std::size_t f = 0; f < trace.num_subcarriers(); ++f) {
        for (std::size_t t = 0; t < trace.num_times(); ++t) {
            const cplx& den = trace.at(t, f, 1);
            double m = std::abs(den);
            mags[t] = m;
            std::size_t idx = t * trace.num_subcarriers() + f;
            if (m <= floor) {
                out.ratio[idx] = {0.0, 0.0};
                out.valid[idx] = 0;
            } else {
                out.ratio[idx] = trace.at(t, f, 0) / den;
                out.valid[idx] = 1;
            }
        }
        std::nth_element(mags.begin(), mags.begin() + mags.size() / 20, mags.end());
        out.denom_floor[f] = mags[mags.size() / 20];
    }
    return out;
}

std::vector<cplx> td_csi(std::span<const cplx> series, int dt_samples) {
    if (dt_samples < 1) throw InvalidInput("dt_samples must be >= 1");
    if (series.size() <= static_cast<std::size_t>(dt_samples))
        throw InvalidInput("series too short for a lag of " + std::to_string(dt_samples) +
                           " samples");
    std::vector<cplx> out(series.size() - dt_samples);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = series[k + dt_samples] - series[k];
    return out;
}

double phase_stability(std::span<const cplx> td_series, std::span<const std::uint8_t> valid) {
    // collect the phases of usable samples; zero-magnitude samples carry
    // no phase and are dropped like flagged ones
    std::vector<cplx> kept;
    kept.reserve(td_series.size());
    for (std::size_t k = 0; k < td_series.size(); ++k) {
        if (!valid.empty() && !valid[k]) continue;
        if (std::abs(td_series[k]) == 0.0) continue;
        kept.push_back(td_series[k]);
    }
    if (kept.size() < 3)
        throw InsufficientData("phase stability needs at least 3 valid samples, got " +
                               std::to_string(kept.size()));
    // unit phasor of each consecutive phase difference; equivalent to
    // wrapping psi_{k+1} - psi_k into (-pi, pi] and averaging exp(j dpsi)
    cplx acc{0.0, 0.0};
    for (std::size_t k = 0; k + 1 < kept.size(); ++k) {
        cplx u = kept[k + 1] * std::conj(kept[k]);
        acc += u / std::abs(u);
    }
    double n = static_cast<double>(kept.size() - 1);
    double variance = 1.0 - std::abs(acc) / n;
    return std::clamp(variance, 0.0, 1.0);
}

namespace detail {

// per-subcarrier profile work, shared by the parallel and serial drivers
void profile_subcarrier(const RatioTrace& ratio, std::span<const int> lags, std::size_t t0,
                        std::size_t t1, std::size_t f, double epsilon, double& variance_out,
                        std::uint8_t& valid_out, double& score_out) {
    const std::size_t nf = ratio.num_subcarriers();
    std::vector<cplx> window(t1 - t0);
    std::vector<std::uint8_t> wvalid(t1 - t0);
    for (std::size_t t = t0; t < t1; ++t) {
        window[t - t0] = ratio.ratio[t * nf + f];
        wvalid[t - t0] = ratio.valid[t * nf + f];
    }

    double sum = 0.0;
    int count = 0;
    for (int lag : lags) {
        if (window.size() <= static_cast<std::size_t>(lag)) continue;
        std::vector<cplx> td(window.size() - lag);
        std::vector<std::uint8_t> tv(td.size());
        for (std::size_t k = 0; k < td.size(); ++k) {
            td[k] = window[k + lag] - window[k];
            tv[k] = wvalid[k + lag] && wvalid[k];
        }
        try {
            sum += phase_stability(td, tv);
            ++count;
        } catch (const InsufficientData&) {
            // this lag has too few valid samples; skip it
        }
    }
    if (count == 0) {
        variance_out = 1.0;
        score_out = -std::log10(epsilon + 1.0);
        valid_out = 0;
    } else {
        variance_out = sum / count;
        score_out = -std::log10(epsilon + variance_out);
        valid_out = 1;
    }
}

} // namespace detail

static SsnrProfile ssnr_profile_impl(const RatioTrace& ratio, const PipelineConfig& cfg,
                                     double window_start, bool parallel) {
    cfg.check(ratio.sample_rate);
    const auto lags = cfg.interval_samples(ratio.sample_rate);
    const std::size_t nf = ratio.num_subcarriers();
    const auto t0 = static_cast<std::size_t>(std::lround(window_start * ratio.sample_rate));
    const auto wlen = static_cast<std::size_t>(std::lround(cfg.window_length * ratio.sample_rate));
    if (t0 + wlen > ratio.num_times)
        throw InvalidInput("window [" + std::to_string(window_start) + ", " +
                           std::to_string(window_start + cfg.window_length) +
                           "] does not fit in the trace");
    const std::size_t t1 = t0 + wlen;

    SsnrProfile p;
    p.window_start = window_start;
    p.subcarrier_freqs = ratio.subcarrier_freqs;
    p.mean_circular_variance.resize(nf);
    p.ssnr_score.resize(nf);
    p.valid.resize(nf);

    if (parallel) {
        const auto n = static_cast<std::ptrdiff_t>(nf);
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t f = 0; f < n; ++f)
            detail::profile_subcarrier(ratio, lags, t0, t1, static_cast<std::size_t>(f),
                                       cfg.epsilon, p.mean_circular_variance[f], p.valid[f],
                                       p.ssnr_score[f]);
    } else {
        for (std::size_t f = 0; f < nf; ++f)
            detail::profile_subcarrier(ratio, lags, t0, t1, f, cfg.epsilon,
                                       p.mean_circular_variance[f], p.valid[f], p.ssnr_score[f]);
    }
    return p;
}

SsnrProfile ssnr_profile(const RatioTrace& ratio, const PipelineConfig& cfg, double window_start) {
    return ssnr_profile_impl(ratio, cfg, window_start, true);
}

namespace serial {
SsnrProfile ssnr_profile(const RatioTrace& ratio, const PipelineConfig& cfg, double window_start) {
    return ssnr_profile_impl(ratio, cfg, window_start, false);
}
} // namespace serial

std::vector<double> window_starts(const RatioTrace& ratio, const PipelineConfig& cfg) {
    std::vector<double> starts;
    double span = static_cast<double>(ratio.num_times) / ratio.sample_rate;
    for (int k = 0;; ++k) {
        double s = k * cfg.window_hop;
        if (s + cfg.window_length > span + 1e-9) break;
        starts.push_back(s);
    }
    return starts;
}

void write_profiles_csv(std::span<const SsnrProfile> profiles, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write profile file: " + path.string());
    out << "window_start,subcarrier_index,freq_hz,mean_circ_variance,ssnr_score\n";
    out.precision(12);
    for (const SsnrProfile& p : profiles)
        for (std::size_t f = 0; f < p.subcarrier_freqs.size(); ++f) {
            if (!p.valid[f]) continue;
            out << p.window_start << "," << f << "," << p.subcarrier_freqs[f] << ","
                << p.mean_circular_variance[f] << "," << p.ssnr_score[f] << "\n";
        }
}

} // namespace fsasense
