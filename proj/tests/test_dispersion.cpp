#include <doctest.h>

#include <cmath>
#include <fstream>

#include "fsasense/dispersion.hpp"

using namespace fsasense;

namespace {

AntennaConfig paper_sim_config() {
    AntennaConfig cfg;
    cfg.num_elements = 12;
    cfg.element_spacing = 0.0145;
    cfg.resonant_freq = 5.57e9;
    cfg.quality_factor = 200.0;
    return cfg;
}

} // namespace

TEST_CASE("resonator phase: zero at resonance, frozen value off resonance") {
    AntennaConfig cfg = paper_sim_config();
    CHECK(resonator_phase(5.57e9, cfg) == 0.0);

    AntennaConfig no_q = cfg;
    no_q.quality_factor = 0.0;
    CHECK(resonator_phase(4.9e9, no_q) == 0.0);
    CHECK(resonator_phase(6.1e9, no_q) == 0.0);

    // direct evaluation of atan(Q (f0/f - f/f0)) at Q=200, f=5.49 GHz
    CHECK(resonator_phase(5.49e9, cfg) == doctest::Approx(1.399682723718716).epsilon(1e-12));

    CHECK_THROWS_AS(resonator_phase(0.0, cfg), InvalidInput);
    CHECK_THROWS_AS(resonator_phase(-1e9, cfg), InvalidInput);
}

TEST_CASE("resonator phase: strictly decreasing and odd under f <-> f0^2/f") {
    AntennaConfig cfg = paper_sim_config();
    double prev = resonator_phase(5.0e9, cfg);
    for (double f = 5.02e9; f <= 6.2e9; f += 0.02e9) {
        double cur = resonator_phase(f, cfg);
        CHECK(cur < prev);
        prev = cur;
    }
    for (double f : {5.45e9, 5.50e9, 5.62e9}) {
        double mirror = cfg.resonant_freq * cfg.resonant_freq / f;
        CHECK(resonator_phase(f, cfg) ==
              doctest::Approx(-resonator_phase(mirror, cfg)).epsilon(1e-12));
    }
}

TEST_CASE("element phase: coupling asymmetry term") {
    AntennaConfig cfg = paper_sim_config();
    cfg.coupling_asymmetry = 3.0e-9;
    CHECK(element_phase(cfg.resonant_freq, cfg) == 0.0);

    AntennaConfig linear_only = cfg;
    linear_only.quality_factor = 0.0;
    linear_only.coupling_asymmetry = 1e-9;
    CHECK(element_phase(5.57e9 + 1e6, linear_only) == doctest::Approx(1e-3).epsilon(1e-12));

    AntennaConfig symmetric = paper_sim_config();
    CHECK(element_phase(5.49e9, symmetric) ==
          doctest::Approx(resonator_phase(5.49e9, symmetric)).epsilon(1e-15));
    // below resonance the phase delay is positive (beam steered negative)
    CHECK(element_phase(5.49e9, symmetric) > 0.0);
}

TEST_CASE("beam direction: sign convention and frozen chain value") {
    AntennaConfig cfg = paper_sim_config();
    CHECK(beam_direction(cfg.resonant_freq, cfg) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(beam_direction(5.49e9, cfg) < 0.0);
    CHECK(beam_direction(5.65e9, cfg) > 0.0);

    // chain atan -> arcsin at Q=200, l=14.5 mm, f=5.49 GHz
    double lambda = kSpeedOfLight / 5.49e9;
    double expected = rad_to_deg(std::asin(-lambda * 1.399682723718716 / (2.0 * kPi * 0.0145)));
    CHECK(beam_direction(5.49e9, cfg) == doctest::Approx(expected).epsilon(1e-9));
    CHECK(beam_direction(5.49e9, cfg) == doctest::Approx(-57.0281898614).epsilon(1e-8));

    // the resonator phase saturates at pi/2, so the arcsin argument can only
    // leave [-1, 1] where lambda > 4 l, i.e. below about 5.17 GHz
    CHECK_THROWS_AS(beam_direction(5.0e9, cfg), OutOfScanRange);
    CHECK_NOTHROW(beam_direction(5.3e9, cfg));
}

TEST_CASE("beam direction: strictly increasing over the default band") {
    const AntennaConfig& cfg = default_antenna();
    auto freqs = uniform_band(kBandLo, kBandHi, 200);
    double prev = beam_direction(freqs[0], cfg);
    for (std::size_t i = 1; i < freqs.size(); ++i) {
        double cur = beam_direction(freqs[i], cfg);
        CHECK(cur > prev);
        prev = cur;
    }
}

TEST_CASE("array factor: peak at the beam direction, nulls, single element") {
    const AntennaConfig& cfg = default_antenna();
    double f = 5.52e9;
    double beam = beam_direction(f, cfg);
    CHECK(array_factor(f, beam, cfg) == doctest::Approx(1.0).epsilon(1e-12));

    AntennaConfig single = cfg;
    single.num_elements = 1;
    for (double th : {-60.0, -10.0, 0.0, 45.0}) CHECK(array_factor(f, th, single) == 1.0);

    // first null: psi = 2 pi / N away from the aligned phase
    double lambda = kSpeedOfLight / f;
    double sin_null =
        std::sin(deg_to_rad(beam)) + lambda / (cfg.num_elements * cfg.element_spacing);
    double theta_null = rad_to_deg(std::asin(sin_null));
    CHECK(array_factor(f, theta_null, cfg) == doctest::Approx(0.0).epsilon(1e-9));

    // bounded in [0, 1]
    for (double th = -90.0; th <= 90.0; th += 1.7) {
        double g = array_factor(f, th, cfg);
        CHECK(g >= 0.0);
        CHECK(g <= 1.0);
    }
}

TEST_CASE("array factor argmax tracks beam_direction within the grid step") {
    const AntennaConfig& cfg = default_antenna();
    auto freqs = uniform_band(kBandLo, kBandHi, 16);
    for (double f : freqs) {
        double best_th = -90.0, best_g = -1.0;
        for (double th = -90.0; th <= 90.0; th += 0.1) {
            double g = array_factor(f, th, cfg);
            if (g > best_g) {
                best_g = g;
                best_th = th;
            }
        }
        CHECK(std::abs(best_th - beam_direction(f, cfg)) <= 0.1);
    }
}

TEST_CASE("default antenna: 60 degree span, symmetric mapping for kappa=0") {
    FrequencyAngleMap map = default_map();
    CHECK(map.size() == kDefaultSubcarriers);
    CHECK(map.span_deg() == doctest::Approx(60.0).epsilon(1e-6));

    // mirrored frequencies around f0 map to mirrored angles up to the
    // per-subcarrier wavelength difference (a few percent over this band,
    // growing toward the band edges where the arcsin steepens)
    const AntennaConfig& cfg = default_antenna();
    for (double df : {0.01e9, 0.04e9, 0.07e9}) {
        double below = beam_direction(5.57e9 - df, cfg);
        double above = beam_direction(5.57e9 + df, cfg);
        CHECK(below == doctest::Approx(-above).epsilon(0.05));
    }
}

TEST_CASE("frequency-angle map: single frequency at resonance") {
    AntennaConfig cfg = default_antenna();
    std::vector<double> one{5.57e9};
    FrequencyAngleMap map = build_frequency_angle_map(cfg, one);
    CHECK(map.size() == 1);
    CHECK(map.angle_at(0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(map.angle_for_frequency(5.57e9) == map.angle_at(0));
}

TEST_CASE("frequency-angle map: out-of-range subcarriers are listed") {
    AntennaConfig cfg = paper_sim_config();
    std::vector<double> freqs{4.9e9, 5.0e9, 5.57e9};
    CHECK_THROWS_AS(build_frequency_angle_map(cfg, freqs), OutOfScanRange);
    try {
        build_frequency_angle_map(cfg, freqs);
    } catch (const OutOfScanRange& e) {
        std::string msg = e.what();
        CHECK(msg.find("4900000000") != std::string::npos);
        CHECK(msg.find("5000000000") != std::string::npos);
        CHECK(msg.find("5570000000") == std::string::npos);
    }
}

TEST_CASE("calibration file: measured endpoints and interpolation") {
    auto path = std::filesystem::temp_directory_path() / "fsasense_cal_ok.csv";
    {
        std::ofstream out(path);
        out << "frequency_hz,angle_deg\n";
        out << "5.49e9,-21\n";
        out << "5.65e9,39\n";
    }
    FrequencyAngleMap map = load_calibration(path);
    CHECK(map.size() == 2);
    CHECK(map.min_angle() == -21.0);
    CHECK(map.max_angle() == 39.0);
    CHECK(map.angle_for_frequency(5.57e9) == doctest::Approx(9.0).epsilon(1e-12));
    CHECK_THROWS_AS(map.frequency_for_angle(45.0), OutOfFov);
    std::filesystem::remove(path);
}

TEST_CASE("calibration file: parse errors carry the row number") {
    namespace fs = std::filesystem;
    auto tmp = fs::temp_directory_path();

    auto write = [&](const char* name, const char* body) {
        fs::path p = tmp / name;
        std::ofstream out(p);
        out << body;
        return p;
    };

    fs::path single = write("fsasense_cal_single.csv", "frequency_hz,angle_deg\n5.5e9,0\n");
    CHECK_THROWS_AS(load_calibration(single), ParseError);

    fs::path bad_header = write("fsasense_cal_hdr.csv", "freq,angle\n5.5e9,0\n5.6e9,5\n");
    CHECK_THROWS_WITH_AS(load_calibration(bad_header),
                         doctest::Contains("row 1"), ParseError);

    fs::path non_monotonic =
        write("fsasense_cal_mono.csv", "frequency_hz,angle_deg\n5.6e9,5\n5.5e9,0\n");
    CHECK_THROWS_WITH_AS(load_calibration(non_monotonic), doctest::Contains("row 3"), ParseError);

    fs::path garbage = write("fsasense_cal_bad.csv", "frequency_hz,angle_deg\n5.5e9,zero\n");
    CHECK_THROWS_WITH_AS(load_calibration(garbage), doctest::Contains("row 2"), ParseError);

    for (const char* n :
         {"fsasense_cal_single.csv", "fsasense_cal_hdr.csv", "fsasense_cal_mono.csv",
          "fsasense_cal_bad.csv"})
        fs::remove(tmp / n);
}

TEST_CASE("map round trip: identity on nodes, bounded between nodes") {
    FrequencyAngleMap map = default_map();
    for (std::size_t i = 0; i < map.size(); ++i) {
        CHECK(map.angle_for_frequency(map.freq_at(i)) == map.angle_at(i));
        CHECK(map.frequency_for_angle(map.angle_at(i)) == map.freq_at(i));
    }
    // interpolated round trip stays within the node spacing
    for (double th = map.min_angle() + 0.05; th < map.max_angle(); th += 0.37) {
        double back = map.angle_for_frequency(map.frequency_for_angle(th));
        CHECK(back == doctest::Approx(th).epsilon(1e-9));
    }
    CHECK_THROWS_AS(map.angle_for_frequency(5.0e9), OutOfFov);
    CHECK_THROWS_AS(map.frequency_for_angle(80.0), OutOfFov);
}

TEST_CASE("beam pattern grid: rows normalized with peak at the beam angle") {
    const AntennaConfig& cfg = default_antenna();
    auto freqs = uniform_band(kBandLo, kBandHi, 8);
    BeamPatternGrid grid = make_beam_pattern_grid(cfg, freqs, -90.0, 90.0, 0.1);
    for (std::size_t fi = 0; fi < grid.frequencies.size(); ++fi) {
        double best_g = -1.0;
        std::size_t best_a = 0;
        for (std::size_t ai = 0; ai < grid.angles.size(); ++ai) {
            CHECK(grid.at(fi, ai) <= 1.0);
            if (grid.at(fi, ai) > best_g) {
                best_g = grid.at(fi, ai);
                best_a = ai;
            }
        }
        CHECK(best_g == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(grid.angles[best_a] - beam_direction(grid.frequencies[fi], cfg)) <= 0.1);
    }
}

TEST_CASE("quality factor tuning is monotone and hits the requested span") {
    AntennaConfig cfg;
    cfg.num_elements = 12;
    cfg.element_spacing = 0.0145;
    cfg.resonant_freq = 5.57e9;
    for (double span : {40.0, 60.0, 80.0}) {
        cfg.quality_factor = tune_quality_factor(cfg, kBandLo, kBandHi, span);
        double got = beam_direction(kBandHi, cfg) - beam_direction(kBandLo, cfg);
        CHECK(got == doctest::Approx(span).epsilon(1e-9));
    }
}

TEST_CASE("antenna config invariants") {
    AntennaConfig cfg;
    cfg.num_elements = 1;
    CHECK_THROWS_AS(cfg.check(), InvalidInput);
    cfg = AntennaConfig{};
    cfg.element_spacing = 0.0;
    CHECK_THROWS_AS(cfg.check(), InvalidInput);
    cfg = AntennaConfig{};
    cfg.quality_factor = -1.0;
    CHECK_THROWS_AS(cfg.check(), InvalidInput);
}
