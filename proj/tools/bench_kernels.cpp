// Timing comparison between the OpenMP kernels and their serial reference
// paths (synthesis, SSNR profiling, beam pattern grid). Also verifies that
// both produce identical output.

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "fsasense/harness.hpp"
#include "fsasense/serial_ref.hpp"

using namespace fsasense;
using clock_type = std::chrono::steady_clock;

static double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

int main() {
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads = %d\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP; both paths run single-threaded\n");
#endif

    Scenario scen = preset_scenario("living_room_multitarget");
    scen.duration = 20.0;
    auto freqs = uniform_band(kBandLo, kBandHi, kDefaultSubcarriers);
    ArrayFactorGain gain(default_antenna());

    auto t0 = clock_type::now();
    CsiTrace trace_par = synthesize(scen, gain, freqs);
    double t_par = seconds_since(t0);
    t0 = clock_type::now();
    CsiTrace trace_ser = serial::synthesize(scen, gain, freqs);
    double t_ser = seconds_since(t0);
    bool synth_equal = trace_par.samples() == trace_ser.samples();
    std::printf("synthesize      serial %7.1f ms   parallel %7.1f ms   speedup %.2fx   %s\n",
                t_ser * 1e3, t_par * 1e3, t_ser / t_par,
                synth_equal ? "bit-identical" : "MISMATCH");

    RatioTrace ratio = csi_ratio(trace_par);
    PipelineConfig cfg = PipelineConfig::defaults();
    auto starts = window_starts(ratio, cfg);
    t0 = clock_type::now();
    std::vector<SsnrProfile> par_profiles;
    for (double s : starts) par_profiles.push_back(ssnr_profile(ratio, cfg, s));
    t_par = seconds_since(t0);
    t0 = clock_type::now();
    std::vector<SsnrProfile> ser_profiles;
    for (double s : starts) ser_profiles.push_back(serial::ssnr_profile(ratio, cfg, s));
    t_ser = seconds_since(t0);
    bool prof_equal = true;
    for (std::size_t i = 0; i < par_profiles.size(); ++i)
        if (par_profiles[i].mean_circular_variance != ser_profiles[i].mean_circular_variance)
            prof_equal = false;
    std::printf("ssnr_profile    serial %7.1f ms   parallel %7.1f ms   speedup %.2fx   %s\n",
                t_ser * 1e3, t_par * 1e3, t_ser / t_par,
                prof_equal ? "bit-identical" : "MISMATCH");

    t0 = clock_type::now();
    BeamPatternGrid grid_par = make_beam_pattern_grid(default_antenna(), freqs);
    t_par = seconds_since(t0);
    t0 = clock_type::now();
    BeamPatternGrid grid_ser = serial::make_beam_pattern_grid(default_antenna(), freqs);
    t_ser = seconds_since(t0);
    bool grid_equal = grid_par.gain == grid_ser.gain;
    std::printf("beam grid       serial %7.1f ms   parallel %7.1f ms   speedup %.2fx   %s\n",
                t_ser * 1e3, t_par * 1e3, t_ser / t_par,
                grid_equal ? "bit-identical" : "MISMATCH");

    return (synth_equal && prof_equal && grid_equal) ? 0 : 1;
}
