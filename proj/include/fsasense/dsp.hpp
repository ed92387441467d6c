#pragma once

#include <span>
#include <vector>

#include "fsasense/common.hpp"

namespace fsasense {

/// Subtract a centered sliding mean (window shrinks at the edges).
std::vector<cplx> sliding_mean_subtract(std::span<const cplx> series, std::size_t window_samples);

/// Project complex samples onto the first principal axis of their I-Q
/// scatter. The axis sign is fixed deterministically.
std::vector<double> principal_axis_projection(std::span<const cplx> series);

/// Zero-phase band-pass: one RBJ biquad run forward and backward with
/// odd-reflection padding at both ends.
std::vector<double> bandpass_zero_phase(std::span<const double> series, double sample_rate,
                                        double f_lo_hz, double f_hi_hz);

/// Periodogram power at frequency f_hz (Goertzel on the given samples).
double goertzel_power(std::span<const double> series, double sample_rate, double f_hz);

struct SpectralPeak {
    double freq_hz = 0.0;     // parabolically interpolated
    double peak_power = 0.0;  // at the peak bin
    double median_power = 0.0;
    double concentration = 0.0; // band power fraction within peak +/- 2 bins
    bool found = false;
};

/// Hann-windowed periodogram over [f_lo, f_hi] with three-bin parabolic
/// peak interpolation on log power.
SpectralPeak band_peak(std::span<const double> series, double sample_rate, double f_lo_hz,
                       double f_hi_hz);

} // namespace fsasense
