#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "fsasense/pipeline.hpp"
#include "fsasense/rng.hpp"

using namespace fsasense;

namespace {

Scenario ratio_scene(double duration = 4.0) {
    Scenario s;
    s.id = "ratio";
    s.geometry.rx = {Vec2{0.0, 1.0}, Vec2{0.0, 1.027}};
    s.duration = duration;
    s.sample_rate = 200.0;
    s.reflectors = {{90.0, 0.0, 1.0}, {-12.0, 2.0, 0.3}};
    double a = deg_to_rad(8.0);
    s.targets.push_back(
        {Oscillation{{2.2 * std::cos(a), 2.2 * std::sin(a)}, {std::cos(a), std::sin(a)}, 0.02, 1.0},
         1.0});
    return s;
}

} // namespace

TEST_CASE("csi ratio: common factor cancels, identical rx gives 1") {
    auto freqs = uniform_band(kBandLo, kBandHi, 8);
    Scenario s = ratio_scene();
    s.noise_sigma = 0.01;
    s.offset_model = OffsetModel::per_packet_random;
    ArrayFactorGain gain(default_antenna());

    CsiTrace with = synthesize(s, gain, freqs);
    Scenario s2 = s;
    s2.offset_model = OffsetModel::none;
    CsiTrace without = synthesize(s2, gain, freqs);

    RatioTrace rw = csi_ratio(with);
    RatioTrace ro = csi_ratio(without);
    for (std::size_t i = 0; i < rw.ratio.size(); ++i)
        CHECK(std::abs(rw.ratio[i] - ro.ratio[i]) <= 1e-12 * std::abs(ro.ratio[i]));

    // rx0 == rx1 makes the ratio exactly one
    CsiTrace twin(200.0, std::vector<double>(freqs.begin(), freqs.end()), 50, {});
    Rng rng(5);
    for (std::size_t t = 0; t < twin.num_times(); ++t)
        for (std::size_t f = 0; f < twin.num_subcarriers(); ++f) {
            cplx v = rng.circular_gaussian(1.0) + cplx{2.0, 0.0};
            twin.at(t, f, 0) = v;
            twin.at(t, f, 1) = v;
        }
    RatioTrace rt = csi_ratio(twin);
    for (const cplx& v : rt.ratio) CHECK(std::abs(v - cplx{1.0, 0.0}) <= 1e-15);
}

TEST_CASE("csi ratio: near-zero denominators flagged, others untouched") {
    auto freqs = uniform_band(kBandLo, kBandHi, 4);
    CsiTrace tr(200.0, std::vector<double>(freqs.begin(), freqs.end()), 20, {});
    for (std::size_t t = 0; t < tr.num_times(); ++t)
        for (std::size_t f = 0; f < tr.num_subcarriers(); ++f) {
            tr.at(t, f, 0) = {1.0, 0.5};
            tr.at(t, f, 1) = f == 2 ? cplx{0.0, 0.0} : cplx{0.5, -0.25};
        }
    RatioTrace rt = csi_ratio(tr);
    for (std::size_t t = 0; t < rt.num_times; ++t) {
        CHECK_FALSE(rt.valid_at(t, 2));
        CHECK(rt.valid_at(t, 0));
        CHECK(rt.valid_at(t, 1));
        CHECK(rt.at(t, 0) == cplx{1.0, 0.5} / cplx{0.5, -0.25});
    }
}

TEST_CASE("td-csi: static removal, rotating-phasor magnitude, length errors") {
    // constant series vanishes exactly
    std::vector<cplx> constant(50, cplx{3.0, -2.0});
    auto z = td_csi(constant, 5);
    CHECK(z.size() == 45);
    for (const cplx& v : z) CHECK(v == cplx{0.0, 0.0});

    // exp(j w k T): |out| = 2 |sin(w dt T / 2)|, constant over k
    double w = 7.3, T = 1.0 / 200.0;
    std::vector<cplx> rot(200);
    for (std::size_t k = 0; k < rot.size(); ++k)
        rot[k] = {std::cos(w * k * T), std::sin(w * k * T)};
    for (int dt : {1, 4, 17}) {
        auto out = td_csi(rot, dt);
        double expect = 2.0 * std::abs(std::sin(w * dt * T / 2.0));
        for (const cplx& v : out) CHECK(std::abs(v) == doctest::Approx(expect).epsilon(1e-9));
    }

    CHECK_THROWS_AS(td_csi(constant, 50), InvalidInput);
    CHECK_THROWS_AS(td_csi(constant, 0), InvalidInput);
}

TEST_CASE("phase stability: rotation, alternation, uniform randomness") {
    // uniformly rotating phasor has perfectly stable differences
    std::vector<cplx> rot(100);
    for (std::size_t k = 0; k < rot.size(); ++k)
        rot[k] = {std::cos(0.13 * k), std::sin(0.13 * k)};
    CHECK(phase_stability(rot) == doctest::Approx(0.0).epsilon(1e-12));

    // alternating steps +c, -c: circular mean of {e^{jc}, e^{-jc}} is cos c
    double c = 1.1;
    std::vector<cplx> alt(101);
    double phase = 0.0;
    for (std::size_t k = 0; k < alt.size(); ++k) {
        alt[k] = {std::cos(phase), std::sin(phase)};
        phase += (k % 2 == 0) ? c : -c;
    }
    CHECK(phase_stability(alt) == doctest::Approx(1.0 - std::abs(std::cos(c))).epsilon(1e-9));

    // uniform random phase differences approach full circular variance
    Rng rng(123);
    std::vector<cplx> rnd(10001);
    phase = 0.0;
    for (std::size_t k = 0; k < rnd.size(); ++k) {
        rnd[k] = {std::cos(phase), std::sin(phase)};
        phase += rng.uniform(-kPi, kPi);
    }
    CHECK(phase_stability(rnd) == doctest::Approx(1.0).epsilon(0.02));

    std::vector<cplx> two(2, cplx{1.0, 0.0});
    CHECK_THROWS_AS(phase_stability(two), InsufficientData);

    // flagged samples are dropped before pairing; dropping the tail leaves
    // the remaining differences untouched
    std::vector<cplx> mixed = rot;
    std::vector<std::uint8_t> valid(mixed.size(), 1);
    mixed.back() = {1e9, 1e9};
    valid.back() = 0;
    CHECK(phase_stability(mixed, valid) == doctest::Approx(0.0).epsilon(1e-12));

    // an interior drop stitches one double-length step into the sequence
    mixed = rot;
    std::fill(valid.begin(), valid.end(), 1);
    mixed[10] = {1e9, 1e9};
    valid[10] = 0;
    double seam = phase_stability(mixed, valid);
    CHECK(seam > 0.0);
    CHECK(seam < 1e-3);
}

TEST_CASE("pipeline config: defaults match the 20-interval plan") {
    PipelineConfig cfg = PipelineConfig::defaults(200.0);
    REQUIRE(cfg.intervals.size() == 20);
    CHECK(cfg.intervals.front() == doctest::Approx(0.005));
    CHECK(cfg.intervals.back() == doctest::Approx(0.1));
    auto lags = cfg.interval_samples(200.0);
    for (int k = 1; k <= 20; ++k) CHECK(lags[k - 1] == k);
    CHECK_NOTHROW(cfg.check(200.0));

    PipelineConfig bad = cfg;
    bad.intervals.push_back(0.0033); // not a multiple of 5 ms
    CHECK_THROWS_AS(bad.check(200.0), InvalidInput);

    bad = cfg;
    bad.window_length = 0.15; // shorter than twice the longest lag
    CHECK_THROWS_AS(bad.check(200.0), InvalidInput);
}

TEST_CASE("ssnr profile: argmin lands at the target-aligned subcarrier") {
    // the variance ordering is created by the noise floor: subcarriers whose
    // beams miss the target sink to the noise level while the aligned one
    // keeps a stable phase progression, so run at a high (40 dB) SNR rather
    // than strictly zero noise, where every subcarrier is equally smooth
    auto freqs = uniform_band(kBandLo, kBandHi, 32);
    FrequencyAngleMap map = build_frequency_angle_map(default_antenna(), freqs);
    Scenario s = ratio_scene(2.0);
    s.snr_db = 40.0;
    s.rng_seed = 2;
    CsiTrace tr = synthesize(s, ArrayFactorGain(default_antenna()), freqs);
    SsnrProfile p = ssnr_profile(csi_ratio(tr), PipelineConfig::defaults(), 0.5);
    CHECK(p.window_start == 0.5);
    std::size_t best = p.best_subcarrier();
    REQUIRE(best != SsnrProfile::npos);
    // within one beam step of the true 8 degree direction
    double spacing = map.angle_at(map.nearest_index(8.0) + 1) - map.angle_at(map.nearest_index(8.0));
    CHECK(std::abs(map.angle_at(best) - 8.0) <= 2.0 * spacing);
    for (std::size_t f = 0; f < p.mean_circular_variance.size(); ++f) {
        CHECK(p.mean_circular_variance[f] >= 0.0);
        CHECK(p.mean_circular_variance[f] <= 1.0);
        CHECK(p.ssnr_score[f] ==
              doctest::Approx(-std::log10(1e-12 + p.mean_circular_variance[f])));
    }
}

TEST_CASE("ssnr profile: pure noise keeps every subcarrier unstable") {
    auto freqs = uniform_band(kBandLo, kBandHi, 16);
    Scenario s;
    s.geometry.rx = {Vec2{0.0, 1.0}, Vec2{0.0, 1.027}};
    s.duration = 2.0;
    s.noise_sigma = 0.1;
    s.rng_seed = 21;
    CsiTrace tr = synthesize(s, ArrayFactorGain(default_antenna()), freqs);
    SsnrProfile p = ssnr_profile(csi_ratio(tr), PipelineConfig::defaults(), 0.0);
    for (std::size_t f = 0; f < p.mean_circular_variance.size(); ++f) {
        CHECK(p.valid[f]);
        CHECK(p.mean_circular_variance[f] > 0.5);
    }
}

TEST_CASE("ssnr profile: scale invariance is exact") {
    auto freqs = uniform_band(kBandLo, kBandHi, 16);
    Scenario s = ratio_scene(2.0);
    s.noise_sigma = 0.02;
    s.rng_seed = 9;
    CsiTrace tr = synthesize(s, ArrayFactorGain(default_antenna()), freqs);
    RatioTrace base = csi_ratio(tr);
    PipelineConfig cfg = PipelineConfig::defaults();
    SsnrProfile p0 = ssnr_profile(base, cfg, 0.5);

    for (cplx c : {cplx{2.0, 0.0}, cplx{0.0, 1.0}, cplx{0.01 * std::cos(1.0), 0.01 * std::sin(1.0)}}) {
        RatioTrace scaled = base;
        for (cplx& v : scaled.ratio) v *= c;
        SsnrProfile p1 = ssnr_profile(scaled, cfg, 0.5);
        CHECK(p1.best_subcarrier() == p0.best_subcarrier());
        for (std::size_t f = 0; f < p0.mean_circular_variance.size(); ++f)
            CHECK(p1.mean_circular_variance[f] ==
                  doctest::Approx(p0.mean_circular_variance[f]).epsilon(1e-9));
    }
}

TEST_CASE("ssnr profile: invalid subcarrier never wins") {
    auto freqs = uniform_band(kBandLo, kBandHi, 8);
    Scenario s = ratio_scene(2.0);
    CsiTrace tr = synthesize(s, ArrayFactorGain(default_antenna()), freqs);
    // kill the denominator on the subcarrier that would otherwise win
    FrequencyAngleMap map = build_frequency_angle_map(default_antenna(), freqs);
    std::size_t winner = map.nearest_index(8.0);
    for (std::size_t t = 0; t < tr.num_times(); ++t) tr.at(t, winner, 1) = {0.0, 0.0};
    SsnrProfile p = ssnr_profile(csi_ratio(tr), PipelineConfig::defaults(), 0.0);
    CHECK_FALSE(p.valid[winner]);
    CHECK(p.best_subcarrier() != winner);
    CHECK(p.best_subcarrier() != SsnrProfile::npos);
}

TEST_CASE("ssnr profile: window must fit the trace") {
    auto freqs = uniform_band(kBandLo, kBandHi, 4);
    Scenario s = ratio_scene(1.0);
    CsiTrace tr = synthesize(s, ArrayFactorGain(default_antenna()), freqs);
    RatioTrace rt = csi_ratio(tr);
    PipelineConfig cfg = PipelineConfig::defaults();
    CHECK_NOTHROW(ssnr_profile(rt, cfg, 0.0));
    CHECK_THROWS_AS(ssnr_profile(rt, cfg, 0.5), InvalidInput);

    auto starts = window_starts(rt, cfg);
    REQUIRE(starts.size() == 1);
    CHECK(starts[0] == 0.0);
}

TEST_CASE("multi-interval averaging beats the shortest interval for slow motion") {
    // slow case: 1 cm peak-to-peak displacement at 1 cm/s mean speed
    auto freqs = uniform_band(kBandLo, kBandHi, 32);
    FrequencyAngleMap map = build_frequency_angle_map(default_antenna(), freqs);
    Scenario s = ratio_scene(3.0);
    s.targets[0].trajectory = Oscillation{std::get<Oscillation>(s.targets[0].trajectory).center,
                                          std::get<Oscillation>(s.targets[0].trajectory).axis,
                                          0.005, 2.0};
    s.snr_db = 20.0;
    s.rng_seed = 31;
    CsiTrace tr = synthesize(s, ArrayFactorGain(default_antenna()), freqs);
    RatioTrace rt = csi_ratio(tr);

    PipelineConfig full = PipelineConfig::defaults();
    PipelineConfig shortest;
    shortest.intervals = {0.005};
    shortest.window_length = full.window_length;

    std::size_t aligned = map.nearest_index(8.0);
    SsnrProfile pf = ssnr_profile(rt, full, 1.0);
    SsnrProfile ps = ssnr_profile(rt, shortest, 1.0);
    CHECK(pf.mean_circular_variance[aligned] <= ps.mean_circular_variance[aligned]);
}

TEST_CASE("static removal: td-csi power equals twice the noise power") {
    auto freqs = uniform_band(kBandLo, kBandHi, 64);
    Scenario s;
    s.geometry.rx = {Vec2{0.0, 1.0}, Vec2{0.0, 1.027}};
    s.duration = 2.0;
    s.sample_rate = 200.0;
    s.reflectors = {{0.0, 1.5, 0.8}, {-20.0, 3.0, 0.4}};
    s.noise_sigma = 0.05;
    s.rng_seed = 17;
    CsiTrace tr = synthesize(s, ArrayFactorGain(default_antenna()), freqs);

    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t f = 0; f < tr.num_subcarriers(); ++f) {
        std::vector<cplx> series(tr.num_times());
        for (std::size_t t = 0; t < tr.num_times(); ++t) series[t] = tr.at(t, f, 0);
        auto dz = td_csi(series, 1);
        for (const cplx& v : dz) sum += std::norm(v);
        count += dz.size();
    }
    REQUIRE(count >= 10000);
    CHECK(sum / count == doctest::Approx(2.0 * 0.05 * 0.05).epsilon(0.05));
}

TEST_CASE("single-rx trace is rejected") {
    CsiTrace empty;
    CHECK_THROWS_AS(csi_ratio(empty), InvalidInput);
}

TEST_CASE("profiles CSV export carries the documented columns") {
    auto freqs = uniform_band(kBandLo, kBandHi, 4);
    Scenario s = ratio_scene(1.0);
    CsiTrace tr = synthesize(s, ArrayFactorGain(default_antenna()), freqs);
    std::vector<SsnrProfile> ps{ssnr_profile(csi_ratio(tr), PipelineConfig::defaults(), 0.0)};
    auto path = std::filesystem::temp_directory_path() / "fsasense_profiles.csv";
    write_profiles_csv(ps, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "window_start,subcarrier_index,freq_hz,mean_circ_variance,ssnr_score");
    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 4);
    std::filesystem::remove(path);
}
