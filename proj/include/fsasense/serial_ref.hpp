#pragma once

#include "fsasense/channel.hpp"
#include "fsasense/pipeline.hpp"

namespace fsasense::serial {

// Single-threaded reference paths for the OpenMP kernels. Each runs the
// same per-element routine in a plain loop, so results must match the
// parallel versions bit for bit; the tests and the benchmark tool rely
// on that.

CsiTrace synthesize(const Scenario& s, const GainModel& gain,
                    std::span<const double> subcarrier_freqs);

SsnrProfile ssnr_profile(const RatioTrace& ratio, const PipelineConfig& cfg, double window_start);

BeamPatternGrid make_beam_pattern_grid(const AntennaConfig& cfg, std::span<const double> freqs_hz,
                                       double angle_lo_deg = -90.0, double angle_hi_deg = 90.0,
                                       double step_deg = 0.1);

} // namespace fsasense::serial
