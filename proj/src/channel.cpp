#include "fsasense/channel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fsasense/rng.hpp"

namespace fsasense {

void ArrayFactorGain::check_subcarriers(std::span<const double> freqs_hz) const {
    std::string offenders;
    for (double f : freqs_hz) {
        try {
            beam_direction(f, cfg_);
        } catch (const OutOfScanRange&) {
            offenders += (offenders.empty() ? "" : ", ") + std::to_string(f);
        }
    }
    if (!offenders.empty())
        throw OutOfScanRange("subcarriers outside the antenna scan range: " + offenders + " Hz");
}

GridGain::GridGain(BeamPatternGrid grid) : grid_(std::move(grid)) {
    if (grid_.frequencies.size() < 2 || grid_.angles.size() < 2)
        throw InvalidInput("beam pattern grid needs at least 2 frequencies and 2 angles");
}

double GridGain::gain(double freq_hz, double theta_deg) const {
    const auto& fv = grid_.frequencies;
    const auto& av = grid_.angles;
    if (freq_hz < fv.front() || freq_hz > fv.back()) return 0.0;
    double th = std::clamp(theta_deg, av.front(), av.back());

    auto fit = std::upper_bound(fv.begin(), fv.end(), freq_hz);
    std::size_t f1 = std::min<std::size_t>(fv.size() - 1, static_cast<std::size_t>(fit - fv.begin()));
    std::size_t f0 = f1 == 0 ? 0 : f1 - 1;
    auto ait = std::upper_bound(av.begin(), av.end(), th);
    std::size_t a1 = std::min<std::size_t>(av.size() - 1, static_cast<std::size_t>(ait - av.begin()));
    std::size_t a0 = a1 == 0 ? 0 : a1 - 1;

    double tf = f1 == f0 ? 0.0 : (freq_hz - fv[f0]) / (fv[f1] - fv[f0]);
    double ta = a1 == a0 ? 0.0 : (th - av[a0]) / (av[a1] - av[a0]);
    double g00 = grid_.at(f0, a0), g01 = grid_.at(f0, a1);
    double g10 = grid_.at(f1, a0), g11 = grid_.at(f1, a1);
    return (1 - tf) * ((1 - ta) * g00 + ta * g01) + tf * ((1 - ta) * g10 + ta * g11);
}

void GridGain::check_subcarriers(std::span<const double> freqs_hz) const {
    std::string offenders;
    for (double f : freqs_hz)
        if (f < grid_.frequencies.front() || f > grid_.frequencies.back())
            offenders += (offenders.empty() ? "" : ", ") + std::to_string(f);
    if (!offenders.empty())
        throw OutOfScanRange("subcarriers outside the beam pattern grid: " + offenders + " Hz");
}

CsiTrace::CsiTrace(double sample_rate, std::vector<double> subcarrier_freqs, std::size_t num_times,
                   TraceMeta meta)
    : sample_rate_(sample_rate), freqs_(std::move(subcarrier_freqs)), nt_(num_times),
      meta_(std::move(meta)) {
    if (!(sample_rate_ > 0.0)) throw InvalidInput("sample rate must be > 0");
    for (std::size_t i = 1; i < freqs_.size(); ++i)
        if (!(freqs_[i] > freqs_[i - 1]))
            throw InvalidInput("subcarrier frequencies must be strictly increasing");
    samples_.assign(nt_ * freqs_.size() * 2, cplx{0.0, 0.0});
}

void CsiTrace::check_finite() const {
    for (const cplx& v : samples_)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw Error("trace contains non-finite samples");
}

namespace detail {

struct StaticTerms {
    // static channel component per (f, rx)
    std::vector<cplx> h; // [f][rx]
};

StaticTerms precompute_static(const Scenario& s, const GainModel& gain,
                              std::span<const double> freqs) {
    StaticTerms st;
    st.h.assign(freqs.size() * 2, cplx{0.0, 0.0});
    for (std::size_t fi = 0; fi < freqs.size(); ++fi) {
        double lambda = kSpeedOfLight / freqs[fi];
        for (int rx = 0; rx < 2; ++rx) {
            double base = distance(s.geometry.tx, s.geometry.rx[rx]);
            cplx acc{0.0, 0.0};
            for (const Reflector& r : s.reflectors) {
                double d = base + r.excess_path;
                double g = gain.gain(freqs[fi], r.angle_deg);
                double ph = -2.0 * kPi * d / lambda;
                acc += r.amplitude * g * cplx{std::cos(ph), std::sin(ph)};
            }
            st.h[fi * 2 + rx] = acc;
        }
    }
    return st;
}

// One packet of the trace; shared by the parallel and serial drivers so
// that both produce bit-identical samples.
void synth_packet(const Scenario& s, const GainModel& gain, std::span<const double> freqs,
                  const StaticTerms& st, double noise_sigma, std::size_t t_index,
                  cplx* out /* [f][rx] */) {
    const double t = static_cast<double>(t_index) / s.sample_rate;
    Rng rng(Rng::mix(s.rng_seed, t_index));
    // the offset draw always happens so that noise streams are identical
    // with and without the per-packet offset applied
    double phi = 2.0 * kPi * rng.uniform();
    cplx offset = s.offset_model == OffsetModel::per_packet_random
                      ? cplx{std::cos(phi), std::sin(phi)}
                      : cplx{1.0, 0.0};

    const std::size_t n_tgt = s.targets.size();
    std::vector<double> tgt_angle(n_tgt);
    std::vector<double> tgt_path(n_tgt * 2), tgt_amp(n_tgt * 2);
    for (std::size_t k = 0; k < n_tgt; ++k) {
        tgt_angle[k] = target_angle_at(s, k, t);
        for (int rx = 0; rx < 2; ++rx) {
            tgt_path[k * 2 + rx] = dynamic_path_length(s, k, rx, t);
            tgt_amp[k * 2 + rx] = s.targets[k].reflectivity /
                                  std::pow(std::max(tgt_path[k * 2 + rx], 1e-3), s.falloff_exponent);
        }
    }

    for (std::size_t fi = 0; fi < freqs.size(); ++fi) {
        double lambda = kSpeedOfLight / freqs[fi];
        std::vector<double> dgain(n_tgt);
        for (std::size_t k = 0; k < n_tgt; ++k) dgain[k] = gain.gain(freqs[fi], tgt_angle[k]);
        for (int rx = 0; rx < 2; ++rx) {
            cplx h = st.h[fi * 2 + rx];
            for (std::size_t k = 0; k < n_tgt; ++k) {
                double ph = -2.0 * kPi * tgt_path[k * 2 + rx] / lambda;
                h += dgain[k] * tgt_amp[k * 2 + rx] * cplx{std::cos(ph), std::sin(ph)};
            }
            if (noise_sigma > 0.0) h += rng.circular_gaussian(noise_sigma);
            out[fi * 2 + rx] = h * offset;
        }
    }
}

} // namespace detail

static CsiTrace synthesize_impl(const Scenario& s, const GainModel& gain,
                                std::span<const double> freqs, bool parallel) {
    ValidationReport rep = validate(s);
    if (!rep.ok()) {
        std::string msg = "invalid scenario:";
        for (const auto& e : rep.errors) msg += "\n  " + e;
        throw InvalidInput(msg);
    }
    if (freqs.empty()) throw InvalidInput("no subcarrier frequencies given");
    gain.check_subcarriers(freqs);

    const double sigma = resolved_noise_sigma(s);
    const std::size_t nt = s.num_samples();
    const std::size_t nf = freqs.size();
    CsiTrace trace(s.sample_rate, std::vector<double>(freqs.begin(), freqs.end()), nt,
                   TraceMeta{s.id, s.rng_seed, gain.id()});
    const detail::StaticTerms st = detail::precompute_static(s, gain, freqs);

    cplx* data = trace.samples().data();
    if (parallel) {
        const auto n = static_cast<std::ptrdiff_t>(nt);
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t t = 0; t < n; ++t)
            detail::synth_packet(s, gain, freqs, st, sigma, static_cast<std::size_t>(t),
                                 data + static_cast<std::size_t>(t) * nf * 2);
    } else {
        for (std::size_t t = 0; t < nt; ++t)
            detail::synth_packet(s, gain, freqs, st, sigma, t, data + t * nf * 2);
    }
    trace.check_finite();
    return trace;
}

CsiTrace synthesize(const Scenario& s, const GainModel& gain,
                    std::span<const double> subcarrier_freqs) {
    return synthesize_impl(s, gain, subcarrier_freqs, true);
}

CsiTrace omnidirectional_baseline(const Scenario& s, std::span<const double> subcarrier_freqs) {
    return synthesize_impl(s, OmniGain{}, subcarrier_freqs, true);
}

namespace serial {
CsiTrace synthesize(const Scenario& s, const GainModel& gain,
                    std::span<const double> subcarrier_freqs) {
    return synthesize_impl(s, gain, subcarrier_freqs, false);
}
} // namespace serial

} // namespace fsasense
