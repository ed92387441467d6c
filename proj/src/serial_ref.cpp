#include "fsasense/serial_ref.hpp"

#include <cmath>

namespace fsasense::serial {

BeamPatternGrid make_beam_pattern_grid(const AntennaConfig& cfg, std::span<const double> freqs_hz,
                                       double angle_lo_deg, double angle_hi_deg, double step_deg) {
    cfg.check();
    if (!(step_deg > 0.0) || !(angle_hi_deg > angle_lo_deg)) throw InvalidInput("bad angle grid");
    BeamPatternGrid grid;
    grid.frequencies.assign(freqs_hz.begin(), freqs_hz.end());
    int n_angles = static_cast<int>(std::floor((angle_hi_deg - angle_lo_deg) / step_deg)) + 1;
    grid.angles.resize(n_angles);
    for (int i = 0; i < n_angles; ++i) grid.angles[i] = angle_lo_deg + i * step_deg;
    grid.gain.resize(grid.frequencies.size() * grid.angles.size());
    for (std::size_t fi = 0; fi < grid.frequencies.size(); ++fi) {
        double* row = grid.gain.data() + fi * grid.angles.size();
        double peak = 0.0;
        for (int ai = 0; ai < n_angles; ++ai) {
            row[ai] = array_factor(grid.frequencies[fi], grid.angles[ai], cfg);
            peak = std::max(peak, row[ai]);
        }
        if (peak > 0.0)
            for (int ai = 0; ai < n_angles; ++ai) row[ai] /= peak;
    }
    return grid;
}

} // namespace fsasense::serial
