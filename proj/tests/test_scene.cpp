#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "fsasense/scene.hpp"

using namespace fsasense;

namespace {

Scenario simple_scene() {
    Scenario s;
    s.id = "simple";
    s.geometry.tx = {0.0, 0.0};
    s.geometry.boresight_deg = 0.0;
    s.geometry.rx = {Vec2{0.0, 1.0}, Vec2{0.0, 1.027}};
    s.duration = 10.0;
    return s;
}

} // namespace

TEST_CASE("target angle: boresight, quadrants and sign convention") {
    Scenario s = simple_scene();
    s.targets.push_back({Stationary{{3.0, 0.0}}, 1.0});
    s.targets.push_back({Stationary{{0.0, 2.0}}, 1.0});  // 90 deg counterclockwise
    s.targets.push_back({Stationary{{0.0, -2.0}}, 1.0}); // 90 deg clockwise
    CHECK(target_angle_at(s, 0, 0.0) == doctest::Approx(0.0));
    CHECK(target_angle_at(s, 1, 0.0) == doctest::Approx(90.0));
    CHECK(target_angle_at(s, 2, 0.0) == doctest::Approx(-90.0));

    // a rotated boresight shifts every angle the opposite way
    s.geometry.boresight_deg = 30.0;
    CHECK(target_angle_at(s, 0, 0.0) == doctest::Approx(-30.0));
    CHECK(target_angle_at(s, 1, 0.0) == doctest::Approx(60.0));

    CHECK_THROWS_AS(target_angle_at(s, 5, 0.0), InvalidInput);
    CHECK_THROWS_AS(target_angle_at(s, 0, -0.1), InvalidInput);
    CHECK_THROWS_AS(target_angle_at(s, 0, 11.0), InvalidInput);
}

TEST_CASE("linear target crossing boresight changes sign continuously") {
    Scenario s = simple_scene();
    s.targets.push_back({LinearMotion{{2.0, -1.0}, {0.0, 0.2}}, 1.0});
    CHECK(target_angle_at(s, 0, 0.0) < 0.0);
    CHECK(target_angle_at(s, 0, 10.0) > 0.0);
    // continuity: no jumps larger than the per-step motion allows
    double prev = target_angle_at(s, 0, 0.0);
    bool crossed = false;
    for (double t = 0.05; t <= 10.0; t += 0.05) {
        double cur = target_angle_at(s, 0, t);
        CHECK(std::abs(cur - prev) < 1.0);
        if (prev < 0.0 && cur >= 0.0) crossed = true;
        prev = cur;
    }
    CHECK(crossed);
}

TEST_CASE("dynamic path length: two legs of the Pythagorean layout") {
    Scenario s = simple_scene();
    // tx at origin, rx 1 m away on +y; target 2 m perpendicular from the midpoint
    s.geometry.rx = {Vec2{0.0, 1.0}, Vec2{0.0, 1.0 + kDefaultRxSeparation}};
    s.targets.push_back({Stationary{{2.0, 0.5}}, 1.0});
    double expected = 2.0 * std::sqrt(0.5 * 0.5 + 2.0 * 2.0);
    CHECK(dynamic_path_length(s, 0, 0, 3.0) == doctest::Approx(expected).epsilon(1e-12));
    // constant over time for a stationary target
    CHECK(dynamic_path_length(s, 0, 0, 0.0) == dynamic_path_length(s, 0, 0, 9.0));
    CHECK_THROWS_AS(dynamic_path_length(s, 0, 2, 0.0), InvalidInput);
}

TEST_CASE("breathing target: path periodic with period 60/rate") {
    Scenario s = simple_scene();
    Breathing br;
    br.position = {2.5, 0.3};
    br.rate_bpm = 15.0; // 4 s period
    s.targets.push_back({br, 1.0});
    double period = 60.0 / br.rate_bpm;
    for (double t : {0.3, 1.1, 2.9}) {
        CHECK(dynamic_path_length(s, 0, 0, t) ==
              doctest::Approx(dynamic_path_length(s, 0, 0, t + period)).epsilon(1e-12));
    }
    // peak-to-peak path change bounded by 4 * displacement amplitude
    double lo = 1e9, hi = -1e9;
    for (double t = 0.0; t <= period; t += 0.01) {
        double d = dynamic_path_length(s, 0, 0, t);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    CHECK(hi - lo <= 4.0 * br.displacement_amplitude + 1e-12);
    CHECK(hi - lo > 0.0);
}

TEST_CASE("rigid translation of the whole scene changes nothing") {
    Scenario s = simple_scene();
    s.targets.push_back({Oscillation{{2.0, 0.5}, {1.0, 0.0}, 0.01, 2.0}, 1.0});
    s.targets.push_back({Stationary{{3.0, -1.0}}, 1.0});

    Scenario moved = s;
    Vec2 delta{12.3, -4.56};
    moved.geometry.tx = moved.geometry.tx + delta;
    moved.geometry.rx[0] = moved.geometry.rx[0] + delta;
    moved.geometry.rx[1] = moved.geometry.rx[1] + delta;
    std::get<Oscillation>(moved.targets[0].trajectory).center =
        std::get<Oscillation>(moved.targets[0].trajectory).center + delta;
    std::get<Stationary>(moved.targets[1].trajectory).position =
        std::get<Stationary>(moved.targets[1].trajectory).position + delta;

    for (double t : {0.0, 0.7, 4.2}) {
        for (std::size_t i = 0; i < s.targets.size(); ++i) {
            CHECK(target_angle_at(s, i, t) ==
                  doctest::Approx(target_angle_at(moved, i, t)).epsilon(1e-9));
            CHECK(dynamic_path_length(s, i, 0, t) ==
                  doctest::Approx(dynamic_path_length(moved, i, 0, t)).epsilon(1e-9));
        }
    }
}

TEST_CASE("validation: invariants and field-of-view warning") {
    Scenario ok = preset_scenario("benchmark_angles");
    CHECK(validate(ok).ok());

    Scenario bad = ok;
    bad.duration = 0.0;
    CHECK_FALSE(validate(bad).ok());

    bad = ok;
    bad.noise_sigma = -1.0;
    bad.snr_db.reset();
    CHECK_FALSE(validate(bad).ok());

    bad = ok;
    bad.geometry.rx[1] = bad.geometry.rx[0];
    CHECK_FALSE(validate(bad).ok());

    bad = ok;
    bad.targets[0].reflectivity = 0.0;
    CHECK_FALSE(validate(bad).ok());

    bad = ok;
    bad.targets[0].trajectory = Breathing{{2.0, 0.0}, 0.005, 80.0};
    CHECK_FALSE(validate(bad).ok());

    // target parked outside the field of view produces a warning, not an error
    FrequencyAngleMap map = default_map();
    Scenario wide = ok;
    wide.targets[0].trajectory = Stationary{{0.3, 0.5}}; // about 59 deg off boresight
    ValidationReport rep = validate(wide, &map);
    CHECK(rep.ok());
    CHECK(rep.warnings.size() > 0);

    ValidationReport in_fov = validate(ok, &map);
    CHECK(in_fov.ok());
    CHECK(in_fov.warnings.empty());
}

TEST_CASE("scenario JSON: round trip and unknown-field rejection") {
    Scenario s = preset_scenario("living_room_multitarget");
    auto path = std::filesystem::temp_directory_path() / "fsasense_scene_rt.json";
    save_scenario(s, path);
    Scenario back = load_scenario(path);
    CHECK(back.id == s.id);
    CHECK(back.targets.size() == s.targets.size());
    CHECK(back.reflectors.size() == s.reflectors.size());
    CHECK(back.duration == s.duration);
    CHECK(back.sample_rate == s.sample_rate);
    CHECK(back.rng_seed == s.rng_seed);
    CHECK(bool(back.snr_db) == bool(s.snr_db));
    for (std::size_t i = 0; i < s.targets.size(); ++i) {
        CHECK(back.targets[i].reflectivity == s.targets[i].reflectivity);
        CHECK(back.targets[i].trajectory.index() == s.targets[i].trajectory.index());
    }
    for (double t : {0.0, 13.37})
        CHECK(target_angle_at(back, 0, t) == doctest::Approx(target_angle_at(s, 0, t)));
    std::filesystem::remove(path);

    CHECK_THROWS_WITH_AS(scenario_from_json_text(R"({"duratoin": 5})", "x"),
                         doctest::Contains("duratoin"), ParseError);
    CHECK_THROWS_WITH_AS(
        scenario_from_json_text(R"({"targets": [{"trajectory": {"type": "warp"}}]})", "x"),
        doctest::Contains("warp"), ParseError);
    CHECK_THROWS_AS(scenario_from_json_text("{nope", "x"), ParseError);
}

TEST_CASE("presets: all six load, validate, and carry the documented names") {
    auto names = preset_scenario_names();
    CHECK(names.size() == 6);
    for (const auto& n : names) {
        Scenario s = preset_scenario(n);
        CHECK(s.id == n);
        CHECK(validate(s).ok());
        CHECK(s.sample_rate == 200.0);
    }
    CHECK_THROWS_AS(preset_scenario("no_such_scene"), InvalidInput);

    // the multitarget preset holds three breathing targets at the documented angles
    Scenario lr = preset_scenario("living_room_multitarget");
    REQUIRE(lr.targets.size() == 3);
    CHECK(target_angle_at(lr, 0, 0.0) == doctest::Approx(-20.0).epsilon(1e-9));
    CHECK(target_angle_at(lr, 1, 0.0) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(target_angle_at(lr, 2, 0.0) == doctest::Approx(20.0).epsilon(1e-9));
}

TEST_CASE("snr resolution: sigma derived from the first target's amplitude") {
    Scenario s = simple_scene();
    s.targets.push_back({Stationary{{2.0, 0.0}}, 1.0});
    s.snr_db = 20.0;
    double a = target_amplitude(s, 0, 0, 0.0);
    CHECK(resolved_noise_sigma(s) == doctest::Approx(a / 10.0).epsilon(1e-12));
    s.snr_db.reset();
    s.noise_sigma = 0.123;
    CHECK(resolved_noise_sigma(s) == 0.123);
}
