#include "fsasense/dsp.hpp"

#include <algorithm>
#include <cmath>

namespace fsasense {

std::vector<cplx> sliding_mean_subtract(std::span<const cplx> series, std::size_t window_samples) {
    if (series.empty()) return {};
    if (window_samples < 1) throw InvalidInput("sliding mean window must be >= 1 sample");
    const std::size_t n = series.size();
    std::vector<cplx> prefix(n + 1, cplx{0.0, 0.0});
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + series[i];
    std::vector<cplx> out(n);
    const std::size_t half = window_samples / 2;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t lo = i > half ? i - half : 0;
        std::size_t hi = std::min(n, i + half + 1);
        cplx mean = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
        out[i] = series[i] - mean;
    }
    return out;
}

std::vector<double> principal_axis_projection(std::span<const cplx> series) {
    const std::size_t n = series.size();
    if (n == 0) return {};
    double mx = 0.0, my = 0.0;
    for (const cplx& v : series) {
        mx += v.real();
        my += v.imag();
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (const cplx& v : series) {
        double dx = v.real() - mx, dy = v.imag() - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    // leading eigenvector of [[sxx, sxy], [sxy, syy]]
    double half_tr = 0.5 * (sxx + syy);
    double det = sxx * syy - sxy * sxy;
    double lam = half_tr + std::sqrt(std::max(0.0, half_tr * half_tr - det));
    double vx, vy;
    if (std::abs(sxy) > 1e-300) {
        vx = lam - syy;
        vy = sxy;
    } else {
        vx = sxx >= syy ? 1.0 : 0.0;
        vy = sxx >= syy ? 0.0 : 1.0;
    }
    double norm = std::hypot(vx, vy);
    if (norm == 0.0) {
        vx = 1.0;
        vy = 0.0;
        norm = 1.0;
    }
    vx /= norm;
    vy /= norm;
    if (vx < 0.0 || (vx == 0.0 && vy < 0.0)) {
        vx = -vx;
        vy = -vy;
    }
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = (series[i].real() - mx) * vx + (series[i].imag() - my) * vy;
    return out;
}

std::vector<double> bandpass_zero_phase(std::span<const double> series, double sample_rate,
                                        double f_lo_hz, double f_hi_hz) {
    if (!(f_lo_hz > 0.0) || !(f_hi_hz > f_lo_hz) || !(f_hi_hz < 0.5 * sample_rate))
        throw InvalidInput("bad band-pass corner frequencies");
    const std::size_t n = series.size();
    if (n < 8) return std::vector<double>(series.begin(), series.end());

    // RBJ constant-peak-gain band-pass biquad
    double f0 = std::sqrt(f_lo_hz * f_hi_hz);
    double q = f0 / (f_hi_hz - f_lo_hz);
    double w0 = 2.0 * kPi * f0 / sample_rate;
    double alpha = std::sin(w0) / (2.0 * q);
    double a0 = 1.0 + alpha;
    double b0 = alpha / a0, b1 = 0.0, b2 = -alpha / a0;
    double a1 = -2.0 * std::cos(w0) / a0, a2 = (1.0 - alpha) / a0;

    auto run = [&](const std::vector<double>& x) {
        std::vector<double> y(x.size());
        double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double v = b0 * x[i] + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
            x2 = x1;
            x1 = x[i];
            y2 = y1;
            y1 = v;
            y[i] = v;
        }
        return y;
    };

    // odd reflection keeps the edges continuous through the filter warm-up
    std::size_t pad = std::min(n - 1, static_cast<std::size_t>(2.0 * sample_rate / f_lo_hz));
    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    for (std::size_t i = 0; i < pad; ++i) ext.push_back(2.0 * series[0] - series[pad - i]);
    ext.insert(ext.end(), series.begin(), series.end());
    for (std::size_t i = 0; i < pad; ++i) ext.push_back(2.0 * series[n - 1] - series[n - 2 - i]);

    std::vector<double> fwd = run(ext);
    std::reverse(fwd.begin(), fwd.end());
    std::vector<double> bwd = run(fwd);
    std::reverse(bwd.begin(), bwd.end());
    return std::vector<double>(bwd.begin() + pad, bwd.begin() + pad + n);
}

double goertzel_power(std::span<const double> series, double sample_rate, double f_hz) {
    const std::size_t n = series.size();
    if (n == 0) return 0.0;
    double w = 2.0 * kPi * f_hz / sample_rate;
    double coeff = 2.0 * std::cos(w);
    double s0 = 0, s1 = 0, s2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        s0 = series[i] + coeff * s1 - s2;
        s2 = s1;
        s1 = s0;
    }
    double re = s1 - s2 * std::cos(w);
    double im = s2 * std::sin(w);
    return (re * re + im * im) / static_cast<double>(n);
}

SpectralPeak band_peak(std::span<const double> series, double sample_rate, double f_lo_hz,
                       double f_hi_hz) {
    SpectralPeak out;
    const std::size_t n = series.size();
    if (n < 16) return out;

    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= static_cast<double>(n);
    std::vector<double> win(n);
    for (std::size_t i = 0; i < n; ++i) {
        double h = 0.5 - 0.5 * std::cos(2.0 * kPi * i / (n - 1));
        win[i] = (series[i] - mean) * h;
    }

    double bin_hz = sample_rate / static_cast<double>(n);
    long k_lo = static_cast<long>(std::ceil(f_lo_hz / bin_hz));
    long k_hi = static_cast<long>(std::floor(f_hi_hz / bin_hz));
    if (k_lo < 1) k_lo = 1;
    if (k_hi <= k_lo) return out;

    // one bin of margin on each side for the parabolic fit
    std::vector<double> power(k_hi - k_lo + 3);
    for (long k = k_lo - 1; k <= k_hi + 1; ++k)
        power[k - (k_lo - 1)] = goertzel_power(win, sample_rate, k * bin_hz);

    long best = k_lo;
    double best_p = -1.0;
    std::vector<double> band;
    for (long k = k_lo; k <= k_hi; ++k) {
        double p = power[k - (k_lo - 1)];
        band.push_back(p);
        if (p > best_p) {
            best_p = p;
            best = k;
        }
    }
    std::vector<double> sorted = band;
    std::sort(sorted.begin(), sorted.end());
    double median = sorted[sorted.size() / 2];

    auto p_at = [&](long k) { return power[k - (k_lo - 1)]; };
    double la = std::log10(std::max(p_at(best - 1), 1e-300));
    double lb = std::log10(std::max(p_at(best), 1e-300));
    double lc = std::log10(std::max(p_at(best + 1), 1e-300));
    double denom = la - 2.0 * lb + lc;
    double delta = std::abs(denom) > 1e-12 ? 0.5 * (la - lc) / denom : 0.0;
    delta = std::clamp(delta, -0.5, 0.5);

    double band_total = 0.0, near_total = 0.0;
    for (long k = k_lo; k <= k_hi; ++k) {
        band_total += p_at(k);
        if (std::labs(k - best) <= 2) near_total += p_at(k);
    }

    out.freq_hz = (static_cast<double>(best) + delta) * bin_hz;
    out.peak_power = best_p;
    out.median_power = median;
    out.concentration = band_total > 0.0 ? near_total / band_total : 0.0;
    out.found = true;
    return out;
}

} // namespace fsasense
