#include "fsasense/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "fsasense/dsp.hpp"

namespace fsasense {

DirectionEstimate estimate_direction(const SsnrProfile& profile, const FrequencyAngleMap& map,
                                     double no_motion_threshold,
                                     const std::optional<DirectionEstimate>& previous) {
    const std::size_t nf = profile.mean_circular_variance.size();
    std::size_t n_valid = 0;
    for (std::size_t i = 0; i < nf; ++i)
        if (profile.valid[i]) ++n_valid;
    if (n_valid == 0) throw InsufficientData("profile has no valid subcarrier");

    double best_v = 2.0;
    for (std::size_t i = 0; i < nf; ++i)
        if (profile.valid[i]) best_v = std::min(best_v, profile.mean_circular_variance[i]);

    // exact ties resolved toward temporal continuity, else lowest frequency
    std::size_t chosen = SsnrProfile::npos;
    double best_dist = 0.0;
    for (std::size_t i = 0; i < nf; ++i) {
        if (!profile.valid[i] || profile.mean_circular_variance[i] != best_v) continue;
        if (chosen == SsnrProfile::npos) {
            chosen = i;
            if (previous && previous->valid)
                best_dist = std::abs(map.angle_for_frequency(profile.subcarrier_freqs[i]) -
                                     previous->angle_deg);
            continue;
        }
        if (previous && previous->valid) {
            double d = std::abs(map.angle_for_frequency(profile.subcarrier_freqs[i]) -
                                previous->angle_deg);
            if (d < best_dist) {
                chosen = i;
                best_dist = d;
            }
        }
    }

    bool has_runner = false;
    double runner_score = 0.0;
    for (std::size_t i = 0; i < nf; ++i) {
        if (!profile.valid[i] || i == chosen) continue;
        if (!has_runner || profile.ssnr_score[i] > runner_score) {
            runner_score = profile.ssnr_score[i];
            has_runner = true;
        }
    }

    DirectionEstimate est;
    est.window_start = profile.window_start;
    est.subcarrier_index = static_cast<int>(chosen);
    est.angle_deg = map.angle_for_frequency(profile.subcarrier_freqs[chosen]);
    est.score_margin = has_runner ? std::max(0.0, profile.ssnr_score[chosen] - runner_score) : 0.0;
    est.valid = best_v <= no_motion_threshold;
    return est;
}

std::vector<DirectionEstimate> track_direction(const RatioTrace& ratio,
                                               const FrequencyAngleMap& map,
                                               const PipelineConfig& cfg,
                                               double no_motion_threshold) {
    auto starts = window_starts(ratio, cfg);
    if (starts.empty()) throw InvalidInput("trace is shorter than one analysis window");
    std::vector<DirectionEstimate> out;
    out.reserve(starts.size());
    std::optional<DirectionEstimate> last_valid;
    for (double s : starts) {
        SsnrProfile p = ssnr_profile(ratio, cfg, s);
        DirectionEstimate est = estimate_direction(p, map, no_motion_threshold, last_valid);
        if (est.valid) last_valid = est;
        out.push_back(est);
    }
    return out;
}

std::vector<DirectionEstimate> track_direction(const CsiTrace& trace, const FrequencyAngleMap& map,
                                               const PipelineConfig& cfg,
                                               double no_motion_threshold) {
    return track_direction(csi_ratio(trace), map, cfg, no_motion_threshold);
}

void RegionSpec::check(const FrequencyAngleMap* fov) const {
    if (sectors.empty()) throw InvalidInput("region spec has no sectors");
    for (std::size_t i = 0; i < sectors.size(); ++i) {
        const Sector& a = sectors[i];
        if (!(a.hi_deg > a.lo_deg))
            throw InvalidInput("sector '" + a.label + "' is empty or reversed");
        if (fov && (a.lo_deg < fov->min_angle() - 1e-9 || a.hi_deg > fov->max_angle() + 1e-9))
            throw InvalidInput("sector '" + a.label + "' extends beyond the field of view");
        for (std::size_t k = i + 1; k < sectors.size(); ++k) {
            const Sector& b = sectors[k];
            if (a.lo_deg < b.hi_deg && b.lo_deg < a.hi_deg)
                throw InvalidInput("sectors '" + a.label + "' and '" + b.label + "' overlap");
        }
    }
}

std::optional<std::string> RegionSpec::sector_of(double angle_deg) const {
    for (const Sector& s : sectors)
        if (angle_deg >= s.lo_deg && angle_deg < s.hi_deg) return s.label;
    return std::nullopt;
}

std::optional<std::string> classify_region(std::span<const DirectionEstimate> estimates,
                                           const RegionSpec& spec, RegionRule rule) {
    spec.check();
    if (rule == RegionRule::last_valid) {
        for (auto it = estimates.rbegin(); it != estimates.rend(); ++it) {
            if (!it->valid) continue;
            if (auto label = spec.sector_of(it->angle_deg)) return label;
        }
        return std::nullopt;
    }
    std::map<std::string, int> counts;
    for (const DirectionEstimate& e : estimates) {
        if (!e.valid) continue;
        if (auto label = spec.sector_of(e.angle_deg)) ++counts[*label];
    }
    if (counts.empty()) return std::nullopt;
    // modal sector; ties go to the first-listed sector
    int best = 0;
    for (const auto& [label, c] : counts) best = std::max(best, c);
    for (const auto& s : spec.sectors) {
        auto it = counts.find(s.label);
        if (it != counts.end() && it->second == best) return s.label;
    }
    return std::nullopt;
}

namespace {

std::size_t nearest_subcarrier(const RatioTrace& ratio, const FrequencyAngleMap& map,
                               double direction_deg) {
    if (!map.contains_angle(direction_deg))
        throw OutOfFov("direction " + std::to_string(direction_deg) +
                       " deg outside the field of view");
    double want_freq = map.frequency_for_angle(direction_deg);
    std::vector<std::size_t> order(ratio.num_subcarriers());
    for (std::size_t f = 0; f < order.size(); ++f) order[f] = f;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(ratio.subcarrier_freqs[a] - want_freq) <
               std::abs(ratio.subcarrier_freqs[b] - want_freq);
    });
    // among the three subcarriers closest to the beam, avoid any whose rx1
    // channel dips into a fade: a near-singular denominator swamps the
    // ratio with spillover from every other direction
    std::size_t best = order[0];
    if (!ratio.denom_floor.empty()) {
        double best_floor = ratio.denom_floor[best];
        for (std::size_t k = 1; k < std::min<std::size_t>(3, order.size()); ++k) {
            if (ratio.denom_floor[order[k]] > 2.0 * best_floor) {
                best = order[k];
                best_floor = ratio.denom_floor[best];
            }
        }
    }
    return best;
}

// invalid samples are held at the previous valid value so the series stays
// uniformly sampled for the filters
std::vector<cplx> subcarrier_series(const RatioTrace& ratio, std::size_t f) {
    const std::size_t nt = ratio.num_times;
    std::vector<cplx> series(nt);
    cplx hold{0.0, 0.0};
    bool seen = false;
    for (std::size_t t = 0; t < nt; ++t) {
        if (ratio.valid_at(t, f)) {
            hold = ratio.at(t, f);
            seen = true;
        }
        series[t] = hold;
    }
    if (!seen) throw InsufficientData("selected subcarrier has no valid samples");
    return series;
}

std::vector<double> projected_residual(const RatioTrace& ratio, std::size_t f) {
    auto window = static_cast<std::size_t>(std::lround(10.0 * ratio.sample_rate));
    std::vector<cplx> residual =
        sliding_mean_subtract(subcarrier_series(ratio, f), std::max<std::size_t>(1, window));
    return principal_axis_projection(residual);
}

} // namespace

std::vector<double> extract_waveform(const RatioTrace& ratio, const FrequencyAngleMap& map,
                                     double direction_deg, double band_lo_bpm,
                                     double band_hi_bpm) {
    std::size_t best = nearest_subcarrier(ratio, map, direction_deg);
    return bandpass_zero_phase(projected_residual(ratio, best), ratio.sample_rate,
                               band_lo_bpm / 60.0, band_hi_bpm / 60.0);
}

RateEstimate respiration_rate(std::span<const double> waveform, double sample_rate) {
    if (waveform.size() < static_cast<std::size_t>(30.0 * sample_rate))
        throw InsufficientData("respiration rate needs at least 30 s of waveform");
    SpectralPeak peak = band_peak(waveform, sample_rate, 0.1, 0.5);
    RateEstimate out;
    if (!peak.found) return out;
    out.bpm = peak.freq_hz * 60.0;
    out.valid = peak.peak_power >= 3.0 * peak.median_power && peak.concentration >= 0.3;
    return out;
}

std::vector<RespirationResult> multi_target_respiration(const CsiTrace& trace,
                                                        const FrequencyAngleMap& map,
                                                        std::span<const double> directions_deg,
                                                        double min_separation_deg,
                                                        std::vector<std::string>* warnings) {
    for (std::size_t i = 0; i < directions_deg.size() && warnings; ++i)
        for (std::size_t k = i + 1; k < directions_deg.size(); ++k)
            if (std::abs(directions_deg[i] - directions_deg[k]) < min_separation_deg)
                warnings->push_back("directions " + std::to_string(directions_deg[i]) + " and " +
                                    std::to_string(directions_deg[k]) +
                                    " deg are closer than one beamwidth");

    RatioTrace ratio = csi_ratio(trace);
    std::vector<RespirationResult> out;
    out.reserve(directions_deg.size());
    for (double dir : directions_deg) {
        RespirationResult r;
        r.direction_deg = dir;
        try {
            std::size_t sc = nearest_subcarrier(ratio, map, dir);
            std::vector<double> projected = projected_residual(ratio, sc);
            r.waveform = bandpass_zero_phase(projected, ratio.sample_rate, 6.0 / 60.0, 30.0 / 60.0);
            RateEstimate rate = respiration_rate(r.waveform, ratio.sample_rate);
            r.rate_bpm = rate.bpm;
            r.valid = rate.valid;
            if (r.valid) {
                // the breathing peak must also clear the broadband noise
                // floor, measured outside the breathing band on the raw
                // projection; a band full of nothing but filtered noise
                // has peaks a few times the floor, a real tone hundreds
                double floor_sum = 0.0;
                int floor_n = 0;
                double bin = ratio.sample_rate / static_cast<double>(projected.size());
                for (double f = 0.7; f <= 1.5; f += std::max(bin, 0.02)) {
                    floor_sum += goertzel_power(projected, ratio.sample_rate, f);
                    ++floor_n;
                }
                double peak = goertzel_power(projected, ratio.sample_rate, rate.bpm / 60.0);
                if (floor_n > 0 && peak < 20.0 * (floor_sum / floor_n)) r.valid = false;
            }
            if (r.valid) {
                // direction consistency: the detected rate must actually peak
                // near the queried beam. A sidelobe picking up breathing from
                // elsewhere shows a clean tone too, but its power across
                // subcarriers peaks at the true direction (leakage is at the
                // sidelobe level, about -15 dB). A flat profile, e.g. from an
                // omnidirectional transmitter, cannot rule the query out and
                // stays valid.
                double rate_hz = rate.bpm / 60.0;
                double here = 0.0, peak = 0.0;
                for (std::size_t f = 0; f < ratio.num_subcarriers(); ++f) {
                    double p = goertzel_power(projected_residual(ratio, f), ratio.sample_rate,
                                              rate_hz);
                    if (f == sc) here = p;
                    peak = std::max(peak, p);
                }
                if (peak > 0.0 && here / peak < 0.15) r.valid = false;
            }
        } catch (const Error& e) {
            r.valid = false;
            if (warnings)
                warnings->push_back("direction " + std::to_string(dir) + " deg: " + e.what());
        }
        out.push_back(std::move(r));
    }
    return out;
}

void write_estimates_csv(std::span<const DirectionEstimate> estimates,
                         const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write estimates file: " + path.string());
    out << "window_start,angle_deg,subcarrier,score_margin,valid\n";
    out.precision(12);
    for (const DirectionEstimate& e : estimates)
        out << e.window_start << "," << e.angle_deg << "," << e.subcarrier_index << ","
            << e.score_margin << "," << (e.valid ? 1 : 0) << "\n";
}

} // namespace fsasense
