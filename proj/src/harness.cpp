#include "fsasense/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>

#include "fsasense/channel.hpp"
#include "fsasense/rng.hpp"
#include "fsasense/serial_ref.hpp"

namespace fsasense {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// config parsing

namespace {

void reject_unknown(const ojson& j, const std::string& path,
                    std::initializer_list<const char*> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) { known = true; break; }
        if (!known) throw ParseError(path + ": unknown field '" + it.key() + "'");
    }
}

double jnum(const ojson& j, const std::string& path) {
    if (!j.is_number()) throw ParseError(path + ": expected a number");
    return j.get<double>();
}

std::string fmt_g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

struct CaseSpec {
    std::string label;
    std::string expected;
    ojson scenario_spec;
    ojson overrides;
};

struct ResolvedConfig {
    std::string id = "experiment";
    std::string kind;
    int trials = 10;
    std::uint64_t seed = 0;
    AntennaConfig antenna = default_antenna();
    int subcarriers = kDefaultSubcarriers;
    double band_lo = kBandLo;
    double band_hi = kBandHi;
    PipelineConfig pipeline = PipelineConfig::defaults();
    double threshold = kNoMotionThreshold;
    std::string gain = "fsa";
    bool emit_trace = false;

    ojson scenario_spec;
    ojson overrides;

    std::optional<double> truth_angle;

    std::vector<double> directions;
    std::vector<double> truth_rates;

    RegionSpec regions;
    RegionRule rule = RegionRule::majority;
    std::vector<CaseSpec> cases;
    std::string generator;
};

RegionSpec parse_regions(const ojson& j, RegionRule& rule) {
    reject_unknown(j, "regions", {"rule", "sectors"});
    if (j.contains("rule")) {
        std::string r = j["rule"].get<std::string>();
        if (r == "majority")
            rule = RegionRule::majority;
        else if (r == "last_valid")
            rule = RegionRule::last_valid;
        else
            throw ParseError("regions.rule: expected 'majority' or 'last_valid'");
    }
    RegionSpec spec;
    if (!j.contains("sectors") || !j["sectors"].is_array())
        throw ParseError("regions.sectors: expected an array");
    for (std::size_t i = 0; i < j["sectors"].size(); ++i) {
        std::string p = "regions.sectors[" + std::to_string(i) + "]";
        const ojson& s = j["sectors"][i];
        reject_unknown(s, p, {"label", "lo", "hi"});
        RegionSpec::Sector sec;
        if (!s.contains("label")) throw ParseError(p + ": missing 'label'");
        sec.label = s["label"].get<std::string>();
        sec.lo_deg = jnum(s.at("lo"), p + ".lo");
        sec.hi_deg = jnum(s.at("hi"), p + ".hi");
        spec.sectors.push_back(sec);
    }
    spec.check();
    return spec;
}

ResolvedConfig parse_config(const ojson& j) {
    if (!j.is_object()) throw ParseError("config: expected a JSON object");
    reject_unknown(j, "config",
                   {"version", "id", "kind", "scenario", "scenario_overrides", "trials", "seed",
                    "subcarriers", "band", "antenna", "pipeline", "no_motion_threshold", "gain",
                    "truth_angle_deg", "directions", "truth_rates_bpm", "regions", "cases",
                    "generator", "emit_trace"});
    ResolvedConfig rc;
    if (j.contains("version") && j["version"].get<int>() != 1)
        throw ParseError("config.version: only version 1 is supported");
    if (j.contains("id")) rc.id = j["id"].get<std::string>();
    if (!j.contains("kind")) throw ParseError("config: missing required field 'kind'");
    rc.kind = j["kind"].get<std::string>();
    if (rc.kind != "direction" && rc.kind != "respiration" && rc.kind != "region")
        throw ParseError("config.kind: expected 'direction', 'respiration' or 'region'");

    if (j.contains("trials")) {
        rc.trials = j["trials"].get<int>();
        if (rc.trials < 1) throw ParseError("config.trials: must be >= 1");
    }
    if (j.contains("seed")) rc.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("subcarriers")) {
        rc.subcarriers = j["subcarriers"].get<int>();
        if (rc.subcarriers < 2) throw ParseError("config.subcarriers: must be >= 2");
    }
    if (j.contains("band")) {
        const ojson& b = j["band"];
        if (!b.is_array() || b.size() != 2) throw ParseError("config.band: expected [lo_hz, hi_hz]");
        rc.band_lo = jnum(b[0], "config.band[0]");
        rc.band_hi = jnum(b[1], "config.band[1]");
        if (!(rc.band_hi > rc.band_lo)) throw ParseError("config.band: hi must exceed lo");
    }
    if (j.contains("antenna")) {
        const ojson& a = j["antenna"];
        reject_unknown(a, "config.antenna",
                       {"num_elements", "element_spacing", "resonant_freq", "quality_factor",
                        "coupling_asymmetry"});
        if (a.contains("num_elements")) rc.antenna.num_elements = a["num_elements"].get<int>();
        if (a.contains("element_spacing"))
            rc.antenna.element_spacing = jnum(a["element_spacing"], "config.antenna.element_spacing");
        if (a.contains("resonant_freq"))
            rc.antenna.resonant_freq = jnum(a["resonant_freq"], "config.antenna.resonant_freq");
        if (a.contains("quality_factor"))
            rc.antenna.quality_factor = jnum(a["quality_factor"], "config.antenna.quality_factor");
        if (a.contains("coupling_asymmetry"))
            rc.antenna.coupling_asymmetry =
                jnum(a["coupling_asymmetry"], "config.antenna.coupling_asymmetry");
        rc.antenna.check();
    }
    if (j.contains("pipeline")) {
        const ojson& p = j["pipeline"];
        reject_unknown(p, "config.pipeline",
                       {"intervals", "window_length", "window_hop", "epsilon"});
        if (p.contains("intervals")) {
            rc.pipeline.intervals.clear();
            for (std::size_t i = 0; i < p["intervals"].size(); ++i)
                rc.pipeline.intervals.push_back(
                    jnum(p["intervals"][i], "config.pipeline.intervals[" + std::to_string(i) + "]"));
        }
        if (p.contains("window_length"))
            rc.pipeline.window_length = jnum(p["window_length"], "config.pipeline.window_length");
        if (p.contains("window_hop"))
            rc.pipeline.window_hop = jnum(p["window_hop"], "config.pipeline.window_hop");
        if (p.contains("epsilon")) rc.pipeline.epsilon = jnum(p["epsilon"], "config.pipeline.epsilon");
    }
    if (j.contains("no_motion_threshold"))
        rc.threshold = jnum(j["no_motion_threshold"], "config.no_motion_threshold");
    if (j.contains("gain")) {
        rc.gain = j["gain"].get<std::string>();
        if (rc.gain != "fsa" && rc.gain != "omni")
            throw ParseError("config.gain: expected 'fsa' or 'omni'");
    }
    if (j.contains("emit_trace")) rc.emit_trace = j["emit_trace"].get<bool>();
    if (j.contains("scenario")) rc.scenario_spec = j["scenario"];
    if (j.contains("scenario_overrides")) rc.overrides = j["scenario_overrides"];
    if (j.contains("truth_angle_deg"))
        rc.truth_angle = jnum(j["truth_angle_deg"], "config.truth_angle_deg");
    if (j.contains("directions"))
        for (std::size_t i = 0; i < j["directions"].size(); ++i)
            rc.directions.push_back(
                jnum(j["directions"][i], "config.directions[" + std::to_string(i) + "]"));
    if (j.contains("truth_rates_bpm"))
        for (std::size_t i = 0; i < j["truth_rates_bpm"].size(); ++i)
            rc.truth_rates.push_back(
                jnum(j["truth_rates_bpm"][i], "config.truth_rates_bpm[" + std::to_string(i) + "]"));
    if (j.contains("regions")) rc.regions = parse_regions(j["regions"], rc.rule);
    if (j.contains("generator")) rc.generator = j["generator"].get<std::string>();
    if (j.contains("cases")) {
        for (std::size_t i = 0; i < j["cases"].size(); ++i) {
            std::string p = "config.cases[" + std::to_string(i) + "]";
            const ojson& c = j["cases"][i];
            reject_unknown(c, p, {"label", "expected", "scenario", "scenario_overrides"});
            CaseSpec cs;
            if (!c.contains("label")) throw ParseError(p + ": missing 'label'");
            cs.label = c["label"].get<std::string>();
            if (!c.contains("expected")) throw ParseError(p + ": missing 'expected'");
            cs.expected = c["expected"].get<std::string>();
            if (!c.contains("scenario")) throw ParseError(p + ": missing 'scenario'");
            cs.scenario_spec = c["scenario"];
            if (c.contains("scenario_overrides")) cs.overrides = c["scenario_overrides"];
            rc.cases.push_back(std::move(cs));
        }
    }

    if (rc.kind == "region") {
        if (rc.generator.empty() && rc.cases.empty())
            throw ParseError("config: region experiments need 'cases' or 'generator'");
        if (rc.generator.empty() && rc.regions.sectors.empty())
            throw ParseError("config: region experiments need 'regions'");
    } else {
        if (rc.scenario_spec.is_null())
            throw ParseError("config: missing required field 'scenario'");
    }
    return rc;
}

// ---------------------------------------------------------------------------
// scenario resolution and overrides

Vec2 rotate_about(const Vec2& p, const Vec2& origin, double deg) {
    double a = deg_to_rad(deg);
    double c = std::cos(a), s = std::sin(a);
    Vec2 d = p - origin;
    return {origin.x + c * d.x - s * d.y, origin.y + s * d.x + c * d.y};
}

Vec2 rotate_dir(const Vec2& v, double deg) { return rotate_about(v, {0.0, 0.0}, deg); }

Vec2& trajectory_anchor(Trajectory& t) {
    if (auto* lin = std::get_if<LinearMotion>(&t)) return lin->start;
    if (auto* osc = std::get_if<Oscillation>(&t)) return osc->center;
    if (auto* br = std::get_if<Breathing>(&t)) return br->position;
    return std::get<Stationary>(t).position;
}

void override_motion(Scenario& s, const std::string& pattern) {
    if (s.targets.empty()) throw InvalidInput("scenario has no target to override");
    Trajectory& traj = s.targets[0].trajectory;
    Vec2 anchor = trajectory_anchor(traj);
    Vec2 ray = anchor - s.geometry.tx;
    if (ray.norm() == 0.0) throw InvalidInput("target sits on the transmitter");
    Vec2 dir = normalized(ray);
    if (pattern == "large") {
        // 1 m sweep at 10 cm/s; an existing linear walk keeps its direction
        // of travel, otherwise the target heads toward the transmitter
        Vec2 vel = dir * (-0.10);
        if (const auto* lin = std::get_if<LinearMotion>(&traj))
            if (lin->velocity.norm() > 0.0) vel = normalized(lin->velocity) * 0.10;
        traj = LinearMotion{anchor, vel};
    } else if (pattern == "small") {
        // 1 cm peak-to-peak displacement at 1 cm/s mean speed
        traj = Oscillation{anchor, dir, 0.005, 2.0};
    } else {
        throw InvalidInput("motion override must be 'large' or 'small'");
    }
}

void override_target_angle(Scenario& s, double angle_deg) {
    if (s.targets.empty()) throw InvalidInput("scenario has no target to override");
    Trajectory& traj = s.targets[0].trajectory;
    Vec2 anchor = trajectory_anchor(traj);
    Vec2 d = anchor - s.geometry.tx;
    double current = wrap_deg(rad_to_deg(std::atan2(d.y, d.x)) - s.geometry.boresight_deg);
    double delta = angle_deg - current;
    if (auto* lin = std::get_if<LinearMotion>(&traj)) {
        lin->start = rotate_about(lin->start, s.geometry.tx, delta);
        lin->velocity = rotate_dir(lin->velocity, delta);
    } else if (auto* osc = std::get_if<Oscillation>(&traj)) {
        osc->center = rotate_about(osc->center, s.geometry.tx, delta);
        osc->axis = rotate_dir(osc->axis, delta);
    } else if (auto* br = std::get_if<Breathing>(&traj)) {
        br->position = rotate_about(br->position, s.geometry.tx, delta);
    } else {
        auto& st = std::get<Stationary>(traj);
        st.position = rotate_about(st.position, s.geometry.tx, delta);
    }
}

void override_target_distance(Scenario& s, double distance_m) {
    if (s.targets.empty()) throw InvalidInput("scenario has no target to override");
    if (!(distance_m > 0.0)) throw InvalidInput("target_distance must be > 0");
    Trajectory& traj = s.targets[0].trajectory;
    // the trajectory anchor (linear start, oscillation center, position)
    // moves onto the requested range along its ray from the transmitter
    Vec2& anchor = trajectory_anchor(traj);
    Vec2 ray = anchor - s.geometry.tx;
    if (ray.norm() == 0.0) throw InvalidInput("target sits on the transmitter");
    anchor = s.geometry.tx + normalized(ray) * distance_m;
}

void override_separation(Scenario& s, double separation_m) {
    if (!(separation_m > 0.0)) throw InvalidInput("transceiver_separation must be > 0");
    Vec2 center = (s.geometry.rx[0] + s.geometry.rx[1]) * 0.5;
    Vec2 ray = center - s.geometry.tx;
    if (ray.norm() == 0.0) throw InvalidInput("rx pair sits on the transmitter");
    Vec2 new_center = s.geometry.tx + normalized(ray) * separation_m;
    Vec2 delta = new_center - center;
    s.geometry.rx[0] = s.geometry.rx[0] + delta;
    s.geometry.rx[1] = s.geometry.rx[1] + delta;
}

void override_target_speed(Scenario& s, double speed_mps) {
    if (s.targets.empty()) throw InvalidInput("scenario has no target to override");
    if (!(speed_mps > 0.0)) throw InvalidInput("target_speed must be > 0");
    Trajectory& traj = s.targets[0].trajectory;
    if (auto* lin = std::get_if<LinearMotion>(&traj)) {
        if (lin->velocity.norm() == 0.0) throw InvalidInput("linear target has zero velocity");
        lin->velocity = normalized(lin->velocity) * speed_mps;
        return;
    }
    if (auto* osc = std::get_if<Oscillation>(&traj)) {
        // mean speed of a sinusoid is 4 a / T
        osc->period = 4.0 * osc->amplitude / speed_mps;
        return;
    }
    throw InvalidInput("target_speed applies to linear or oscillation trajectories only");
}

} // namespace

Scenario materialize_scenario(const ojson& spec) {
    if (spec.is_string()) {
        std::string ref = spec.get<std::string>();
        if (ref.rfind("preset:", 0) == 0) return preset_scenario(ref.substr(7));
        return load_scenario(ref);
    }
    if (spec.is_object()) return scenario_from_json_text(spec.dump(), "inline");
    throw ParseError("scenario: expected a preset reference, a path or an object");
}

void apply_scenario_overrides(Scenario& s, const ojson& overrides) {
    if (overrides.is_null()) return;
    if (!overrides.is_object()) throw ParseError("scenario_overrides: expected an object");
    reject_unknown(overrides, "scenario_overrides",
                   {"motion", "snr_db", "noise_sigma", "target_angle_deg", "target_distance",
                    "transceiver_separation", "target_speed", "duration"});

    // fixed application order; noise is resolved to an absolute sigma before
    // the geometry changes so sweeps see the SNR consequences of geometry
    if (overrides.contains("motion")) override_motion(s, overrides["motion"].get<std::string>());
    if (overrides.contains("snr_db")) s.snr_db = jnum(overrides["snr_db"], "scenario_overrides.snr_db");
    if (overrides.contains("noise_sigma")) {
        s.noise_sigma = jnum(overrides["noise_sigma"], "scenario_overrides.noise_sigma");
        s.snr_db.reset();
    }
    s.noise_sigma = resolved_noise_sigma(s);
    s.snr_db.reset();
    if (overrides.contains("target_angle_deg"))
        override_target_angle(s, jnum(overrides["target_angle_deg"],
                                      "scenario_overrides.target_angle_deg"));
    if (overrides.contains("target_distance"))
        override_target_distance(s, jnum(overrides["target_distance"],
                                         "scenario_overrides.target_distance"));
    if (overrides.contains("transceiver_separation"))
        override_separation(s, jnum(overrides["transceiver_separation"],
                                    "scenario_overrides.transceiver_separation"));
    if (overrides.contains("target_speed"))
        override_target_speed(s, jnum(overrides["target_speed"],
                                      "scenario_overrides.target_speed"));
    if (overrides.contains("duration"))
        s.duration = jnum(overrides["duration"], "scenario_overrides.duration");
}

// ---------------------------------------------------------------------------
// region-case generators

namespace {

Vec2 polar(double d, double angle_deg) {
    double a = deg_to_rad(angle_deg);
    return {d * std::cos(a), d * std::sin(a)};
}

Scenario region_walk_scene(const std::string& id, Vec2 from, Vec2 to, double speed,
                           double rx_separation) {
    Scenario s = preset_scenario("benchmark_angles");
    s.id = id;
    s.geometry.rx[0] = {0.0, rx_separation - 0.5 * kDefaultRxSeparation};
    s.geometry.rx[1] = {0.0, rx_separation + 0.5 * kDefaultRxSeparation};
    double dist = distance(from, to);
    // round the walk up to the analysis-window grid so the last window
    // covers the arrival, where the decisive final angle lives
    double duration = std::ceil(2.0 * dist / speed) / 2.0;
    s.duration = duration;
    s.targets = {Target{LinearMotion{from, normalized(to - from) * (dist / duration)}, 1.0}};
    return s;
}

struct GeneratedCase {
    std::string label;
    std::string expected;
    Scenario scenario;
};

// four walking paths at two deployments, two angular regions each
std::vector<GeneratedCase> corner_cases() {
    std::vector<GeneratedCase> out;
    out.push_back({"corner_left", "L",
                   region_walk_scene("corner_left", polar(3.2, -26.0), polar(2.0, -8.0), 0.5, 1.0)});
    out.push_back({"corner_right", "R",
                   region_walk_scene("corner_right", polar(3.2, 26.0), polar(2.0, 8.0), 0.5, 1.0)});
    out.push_back({"entrance_left", "L",
                   region_walk_scene("entrance_left", polar(2.6, -24.0), polar(1.6, -6.0), 0.5, 1.5)});
    out.push_back({"entrance_right", "R",
                   region_walk_scene("entrance_right", polar(2.6, 24.0), polar(1.6, 6.0), 0.5, 1.5)});
    return out;
}

RegionSpec corner_regions_spec() {
    RegionSpec spec;
    spec.sectors = {{"L", -30.0, -1.0}, {"R", 1.0, 29.0}};
    return spec;
}

// walk from a randomized start inside the shared room to one of three
// doorways; the start position varies within the room, so the bearing at
// the walk's end, not its path, identifies the destination
GeneratedCase three_rooms_case(int room, std::uint64_t trial_seed) {
    static const double door_angle[3] = {-24.0, 0.0, 24.0};
    static const char* room_label[3] = {"R1", "R2", "R3"};
    Rng rng(Rng::mix(trial_seed, 977));
    Vec2 from{rng.uniform(4.0, 5.0), rng.uniform(-0.9, 0.9)};
    Vec2 to = polar(2.6, door_angle[room]);
    GeneratedCase gc;
    gc.label = room_label[room];
    gc.expected = room_label[room];
    gc.scenario = region_walk_scene(std::string("room_") + room_label[room], from, to, 0.55, 1.0);
    return gc;
}

RegionSpec three_rooms_spec() {
    RegionSpec spec;
    spec.sectors = {{"R1", -29.0, -12.0}, {"R2", -12.0, 12.0}, {"R3", 12.0, 29.0}};
    return spec;
}

// ---------------------------------------------------------------------------
// artifact writing with cleanup on failure

class ArtifactSink {
public:
    explicit ArtifactSink(fs::path root) : root_(std::move(root)), enabled_(!root_.empty()) {}

    bool enabled() const { return enabled_; }

    fs::path prepare(const fs::path& relative) {
        fs::path full = root_ / relative;
        fs::path dir = full.parent_path();
        if (!dir.empty() && !fs::exists(dir)) {
            fs::path probe = dir;
            std::vector<fs::path> missing;
            while (!probe.empty() && !fs::exists(probe)) {
                missing.push_back(probe);
                probe = probe.parent_path();
            }
            fs::create_directories(dir);
            for (auto it = missing.rbegin(); it != missing.rend(); ++it)
                created_dirs_.push_back(*it);
        }
        created_files_.push_back(full);
        return full;
    }

    void discard_all() noexcept {
        std::error_code ec;
        for (const fs::path& f : created_files_) fs::remove(f, ec);
        for (auto it = created_dirs_.rbegin(); it != created_dirs_.rend(); ++it)
            fs::remove(*it, ec); // only removes empty directories
    }

private:
    fs::path root_;
    bool enabled_;
    std::vector<fs::path> created_files_;
    std::vector<fs::path> created_dirs_;
};

void write_text(ArtifactSink& sink, const fs::path& rel, const std::string& text) {
    if (!sink.enabled()) return;
    fs::path p = sink.prepare(rel);
    std::ofstream out(p);
    if (!out) throw Error("cannot write " + p.string());
    out << text;
}

std::string trial_dir(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "trial_%03d", index);
    return buf;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// track_direction with the per-window profiles kept for export
std::vector<DirectionEstimate> track_with_profiles(const RatioTrace& ratio,
                                                   const FrequencyAngleMap& map,
                                                   const PipelineConfig& cfg, double threshold,
                                                   std::vector<SsnrProfile>& profiles) {
    auto starts = window_starts(ratio, cfg);
    if (starts.empty()) throw InvalidInput("trace is shorter than one analysis window");
    std::vector<DirectionEstimate> estimates;
    std::optional<DirectionEstimate> last_valid;
    for (double st : starts) {
        profiles.push_back(ssnr_profile(ratio, cfg, st));
        DirectionEstimate est = estimate_direction(profiles.back(), map, threshold, last_valid);
        if (est.valid) last_valid = est;
        estimates.push_back(est);
    }
    return estimates;
}

} // namespace

// ---------------------------------------------------------------------------
// report serialization

ojson ExperimentReport::to_json() const {
    ojson j;
    j["schema_version"] = kReportSchemaVersion;
    j["id"] = id;
    j["kind"] = kind;
    j["config"] = config;
    j["seeds"] = seeds;
    j["trials"] = ojson::array();
    for (const TrialRecord& t : trials) {
        ojson jt;
        jt["index"] = t.index;
        jt["seed"] = t.seed;
        for (auto it = t.details.begin(); it != t.details.end(); ++it) jt[it.key()] = it.value();
        j["trials"].push_back(std::move(jt));
    }
    j["aggregates"] = aggregates;
    return j;
}

ojson AntennaComparison::to_json() const {
    ojson j;
    j["trials"] = trials;
    j["fsa_better"] = fsa_better;
    ojson per = ojson::array();
    for (int i = 0; i < trials; ++i) {
        ojson row;
        row["seed"] = fsa.seeds[i];
        row["fsa_error_bpm"] = fsa.trials[i].details["mean_error_bpm"];
        row["omni_error_bpm"] = omni.trials[i].details["mean_error_bpm"];
        per.push_back(std::move(row));
    }
    j["per_trial"] = std::move(per);
    j["fsa"] = fsa.to_json();
    j["omni"] = omni.to_json();
    return j;
}

// ---------------------------------------------------------------------------
// experiment execution

ExperimentReport run_experiment(const ojson& config, const fs::path& out_dir,
                                std::optional<std::uint64_t> seed_override) {
    auto t_start = std::chrono::steady_clock::now();
    ResolvedConfig rc = parse_config(config);
    if (seed_override) rc.seed = *seed_override;

    auto freqs = uniform_band(rc.band_lo, rc.band_hi, rc.subcarriers);
    FrequencyAngleMap map = build_frequency_angle_map(rc.antenna, freqs);
    ArrayFactorGain fsa_gain(rc.antenna);
    OmniGain omni_gain;
    const GainModel& gain = rc.gain == "omni" ? static_cast<const GainModel&>(omni_gain)
                                              : static_cast<const GainModel&>(fsa_gain);

    ExperimentReport report;
    report.id = rc.id;
    report.kind = rc.kind;
    report.config = config;
    if (seed_override) report.config["seed"] = *seed_override;

    ArtifactSink sink(out_dir);
    try {
        if (rc.kind == "direction") {
            Scenario base = materialize_scenario(rc.scenario_spec);
            apply_scenario_overrides(base, rc.overrides);
            double truth =
                rc.truth_angle ? *rc.truth_angle
                               : (base.targets.empty() ? 0.0 : target_angle_at(base, 0, 0.0));
            std::vector<double> errors;
            int no_motion_trials = 0;
            for (int k = 0; k < rc.trials; ++k) {
                std::uint64_t seed_k = Rng::mix(rc.seed, static_cast<std::uint64_t>(k));
                Scenario scen = base;
                scen.rng_seed = seed_k;
                CsiTrace trace = synthesize(scen, gain, freqs);
                RatioTrace ratio = csi_ratio(trace);
                std::vector<SsnrProfile> profiles;
                auto estimates = track_with_profiles(ratio, map, rc.pipeline, rc.threshold, profiles);

                std::vector<double> angles;
                for (const auto& e : estimates)
                    if (e.valid) angles.push_back(e.angle_deg);

                TrialRecord rec;
                rec.index = k;
                rec.seed = seed_k;
                rec.details["truth_angle_deg"] = truth;
                rec.details["valid_windows"] = angles.size();
                if (angles.empty()) {
                    ++no_motion_trials;
                    rec.details["angle_deg"] = nullptr;
                    rec.details["error_deg"] = nullptr;
                    errors.push_back(map.span_deg()); // honest worst-case penalty
                } else {
                    double est = median(angles);
                    rec.details["angle_deg"] = est;
                    rec.details["error_deg"] = std::abs(est - truth);
                    errors.push_back(std::abs(est - truth));
                }
                if (sink.enabled()) {
                    std::string dir = trial_dir(k);
                    write_estimates_csv(estimates, sink.prepare(dir + "/estimates.csv"));
                    write_profiles_csv(profiles, sink.prepare(dir + "/profiles.csv"));
                    if (rc.emit_trace) {
                        write_trace_csv(trace, sink.prepare(dir + "/trace.csv"));
                        write_trace_meta(trace, sink.prepare(dir + "/trace_meta.json"));
                    }
                }
                report.seeds.push_back(seed_k);
                report.trials.push_back(std::move(rec));
            }
            double mae = 0.0, worst = 0.0;
            for (double e : errors) {
                mae += e;
                worst = std::max(worst, e);
            }
            mae /= errors.empty() ? 1.0 : static_cast<double>(errors.size());
            report.aggregates["angle_mae_deg"] = mae;
            report.aggregates["angle_max_error_deg"] = worst;
            report.aggregates["trials_without_motion"] = no_motion_trials;
        } else if (rc.kind == "respiration") {
            Scenario base = materialize_scenario(rc.scenario_spec);
            apply_scenario_overrides(base, rc.overrides);

            std::vector<double> directions = rc.directions;
            if (directions.empty()) {
                for (std::size_t i = 0; i < base.targets.size(); ++i)
                    if (std::holds_alternative<Breathing>(base.targets[i].trajectory))
                        directions.push_back(target_angle_at(base, i, 0.0));
                if (directions.empty())
                    throw InvalidInput("respiration experiment needs directions or breathing targets");
            }
            std::vector<double> truths = rc.truth_rates;
            if (truths.empty()) {
                for (double dir : directions) {
                    double best_d = 1e9, rate = 0.0;
                    for (std::size_t i = 0; i < base.targets.size(); ++i) {
                        const auto* br = std::get_if<Breathing>(&base.targets[i].trajectory);
                        if (!br) continue;
                        double d = std::abs(target_angle_at(base, i, 0.0) - dir);
                        if (d < best_d) {
                            best_d = d;
                            rate = br->rate_bpm;
                        }
                    }
                    truths.push_back(rate);
                }
            }
            if (truths.size() != directions.size())
                throw InvalidInput("truth_rates_bpm must match directions in length");

            std::vector<double> errors;
            int invalid = 0;
            for (int k = 0; k < rc.trials; ++k) {
                std::uint64_t seed_k = Rng::mix(rc.seed, static_cast<std::uint64_t>(k));
                Scenario scen = base;
                scen.rng_seed = seed_k;
                CsiTrace trace = synthesize(scen, gain, freqs);
                std::vector<std::string> warnings;
                auto results = multi_target_respiration(trace, map, directions, 15.0, &warnings);

                TrialRecord rec;
                rec.index = k;
                rec.seed = seed_k;
                ojson jr = ojson::array();
                double err_sum = 0.0;
                bool all_valid = true;
                for (std::size_t i = 0; i < results.size(); ++i) {
                    ojson row;
                    row["direction_deg"] = results[i].direction_deg;
                    row["truth_bpm"] = truths[i];
                    if (results[i].valid) {
                        double e = std::abs(results[i].rate_bpm - truths[i]);
                        row["rate_bpm"] = results[i].rate_bpm;
                        row["error_bpm"] = e;
                        errors.push_back(e);
                        err_sum += e;
                    } else {
                        row["rate_bpm"] = nullptr;
                        row["error_bpm"] = nullptr;
                        ++invalid;
                        all_valid = false;
                    }
                    row["valid"] = results[i].valid;
                    jr.push_back(std::move(row));
                }
                rec.details["results"] = jr;
                rec.details["warnings"] = warnings;
                rec.details["mean_error_bpm"] =
                    all_valid ? ojson(err_sum / static_cast<double>(results.size())) : ojson(nullptr);
                if (sink.enabled()) {
                    std::string dir = trial_dir(k);
                    write_text(sink, dir + "/respiration.json", rec.details.dump(2) + "\n");
                    if (rc.emit_trace) {
                        write_trace_csv(trace, sink.prepare(dir + "/trace.csv"));
                        write_trace_meta(trace, sink.prepare(dir + "/trace_meta.json"));
                    }
                }
                report.seeds.push_back(seed_k);
                report.trials.push_back(std::move(rec));
            }
            if (errors.empty()) {
                report.aggregates["respiration_mae_bpm"] = nullptr;
                report.aggregates["respiration_max_error_bpm"] = nullptr;
            } else {
                double mae = 0.0, worst = 0.0;
                for (double e : errors) {
                    mae += e;
                    worst = std::max(worst, e);
                }
                report.aggregates["respiration_mae_bpm"] = mae / static_cast<double>(errors.size());
                report.aggregates["respiration_max_error_bpm"] = worst;
            }
            report.aggregates["invalid_rates"] = invalid;
        } else { // region
            RegionSpec regions = rc.regions;
            RegionRule rule = rc.rule;
            bool generated = !rc.generator.empty();
            if (generated) {
                if (rc.generator == "corner_regions") {
                    if (regions.sectors.empty()) regions = corner_regions_spec();
                } else if (rc.generator == "three_rooms") {
                    if (regions.sectors.empty()) regions = three_rooms_spec();
                    rule = RegionRule::last_valid;
                } else {
                    throw ParseError("config.generator: unknown generator '" + rc.generator + "'");
                }
            }
            regions.check();

            // ordered confusion matrix rows by case label, columns by sector
            std::vector<std::string> columns;
            for (const auto& s : regions.sectors) columns.push_back(s.label);
            columns.push_back("unclassified");

            std::vector<std::string> row_labels;
            std::map<std::string, std::map<std::string, int>> confusion;
            int correct = 0, total = 0;

            int n_cases = generated ? (rc.generator == "three_rooms" ? 3 : 4)
                                    : static_cast<int>(rc.cases.size());
            for (int ci = 0; ci < n_cases; ++ci) {
                for (int k = 0; k < rc.trials; ++k) {
                    std::uint64_t seed_k =
                        Rng::mix(rc.seed, static_cast<std::uint64_t>(ci) * 100003u +
                                              static_cast<std::uint64_t>(k));
                    std::string label, expected;
                    Scenario scen;
                    if (generated && rc.generator == "three_rooms") {
                        GeneratedCase gc = three_rooms_case(ci, seed_k);
                        label = gc.label;
                        expected = gc.expected;
                        scen = std::move(gc.scenario);
                    } else if (generated) {
                        GeneratedCase gc = corner_cases()[ci];
                        label = gc.label;
                        expected = gc.expected;
                        scen = std::move(gc.scenario);
                    } else {
                        const CaseSpec& cs = rc.cases[ci];
                        label = cs.label;
                        expected = cs.expected;
                        scen = materialize_scenario(cs.scenario_spec);
                        apply_scenario_overrides(scen, cs.overrides);
                    }
                    scen.rng_seed = seed_k;
                    if (std::find(row_labels.begin(), row_labels.end(), label) == row_labels.end())
                        row_labels.push_back(label);

                    CsiTrace trace = synthesize(scen, gain, freqs);
                    RatioTrace ratio = csi_ratio(trace);
                    std::vector<SsnrProfile> profiles;
                    auto estimates =
                        track_with_profiles(ratio, map, rc.pipeline, rc.threshold, profiles);
                    auto predicted = classify_region(estimates, regions, rule);
                    std::string pred = predicted.value_or("unclassified");
                    ++confusion[label][pred];
                    ++total;
                    if (pred == expected) ++correct;

                    TrialRecord rec;
                    rec.index = static_cast<int>(report.trials.size());
                    rec.seed = seed_k;
                    rec.details["case"] = label;
                    rec.details["expected"] = expected;
                    rec.details["predicted"] = pred;
                    rec.details["correct"] = pred == expected;
                    if (sink.enabled()) {
                        std::string dir = label + "_" + trial_dir(k);
                        write_estimates_csv(estimates, sink.prepare(dir + "/estimates.csv"));
                        write_profiles_csv(profiles, sink.prepare(dir + "/profiles.csv"));
                        if (rc.emit_trace) {
                            write_trace_csv(trace, sink.prepare(dir + "/trace.csv"));
                            write_trace_meta(trace, sink.prepare(dir + "/trace_meta.json"));
                        }
                    }
                    report.seeds.push_back(seed_k);
                    report.trials.push_back(std::move(rec));
                }
            }
            ojson jconf;
            for (const std::string& row : row_labels) {
                ojson jrow;
                for (const std::string& col : columns) {
                    auto it = confusion[row].find(col);
                    jrow[col] = it == confusion[row].end() ? 0 : it->second;
                }
                jconf[row] = std::move(jrow);
            }
            report.aggregates["confusion"] = std::move(jconf);
            report.aggregates["accuracy"] =
                total > 0 ? static_cast<double>(correct) / total : 0.0;
            report.aggregates["trials_total"] = total;
        }

        auto t_end = std::chrono::steady_clock::now();
        report.runtime_s = std::chrono::duration<double>(t_end - t_start).count();
        if (sink.enabled()) {
            write_text(sink, "report.json", report.to_json().dump(2) + "\n");
            ojson info;
            info["runtime_s"] = report.runtime_s;
            write_text(sink, "run_info.json", info.dump(2) + "\n");
        }
    } catch (...) {
        sink.discard_all();
        throw;
    }
    return report;
}

ExperimentReport run_experiment(const fs::path& config_path, const fs::path& out_dir,
                                std::optional<std::uint64_t> seed_override) {
    std::ifstream in(config_path);
    if (!in) throw ParseError("cannot open config file: " + config_path.string());
    ojson j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("config JSON: " + std::string(e.what()));
    }
    return run_experiment(j, out_dir, seed_override);
}

AntennaComparison compare_antennas(const ojson& config, const fs::path& out_dir,
                                   std::optional<std::uint64_t> seed_override) {
    ResolvedConfig probe = parse_config(config);
    if (probe.kind != "respiration")
        throw InvalidInput("compare_antennas expects a respiration experiment config");

    ojson cfg_fsa = config;
    cfg_fsa["gain"] = "fsa";
    cfg_fsa["id"] = probe.id + "_fsa";
    ojson cfg_omni = config;
    cfg_omni["gain"] = "omni";
    cfg_omni["id"] = probe.id + "_omni";

    AntennaComparison cmp;
    cmp.fsa = run_experiment(cfg_fsa, out_dir.empty() ? fs::path{} : out_dir / "fsa", seed_override);
    cmp.omni =
        run_experiment(cfg_omni, out_dir.empty() ? fs::path{} : out_dir / "omni", seed_override);
    cmp.trials = static_cast<int>(cmp.fsa.trials.size());
    for (int i = 0; i < cmp.trials; ++i) {
        const ojson& ef = cmp.fsa.trials[i].details["mean_error_bpm"];
        const ojson& eo = cmp.omni.trials[i].details["mean_error_bpm"];
        double f = ef.is_null() ? std::numeric_limits<double>::infinity() : ef.get<double>();
        double o = eo.is_null() ? std::numeric_limits<double>::infinity() : eo.get<double>();
        if (f < o) ++cmp.fsa_better;
    }
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        std::ofstream out(out_dir / "comparison.json");
        if (!out) throw Error("cannot write comparison.json");
        out << cmp.to_json().dump(2) << "\n";
    }
    return cmp;
}

std::vector<ExperimentReport> sweep(const ojson& config, const std::string& parameter,
                                    std::span<const double> values, const fs::path& out_dir) {
    static const char* allowed[] = {"target_distance", "transceiver_separation", "noise_sigma",
                                    "target_speed"};
    bool ok = false;
    for (const char* a : allowed)
        if (parameter == a) ok = true;
    if (!ok)
        throw InvalidInput("unknown sweep parameter '" + parameter +
                           "' (expected target_distance, transceiver_separation, noise_sigma or "
                           "target_speed)");
    if (values.empty()) throw InvalidInput("sweep needs at least one value");

    ResolvedConfig probe = parse_config(config);
    std::vector<ExperimentReport> reports;
    ojson summary = ojson::array();
    for (double v : values) {
        ojson cfg = config;
        if (!cfg.contains("scenario_overrides")) cfg["scenario_overrides"] = ojson::object();
        cfg["scenario_overrides"][parameter] = v;
        std::string sub_id = probe.id + "_" + parameter + "=" + fmt_g(v);
        cfg["id"] = sub_id;
        fs::path sub_dir = out_dir.empty() ? fs::path{} : out_dir / sub_id;
        reports.push_back(run_experiment(cfg, sub_dir));
        ojson row;
        row["value"] = v;
        row["aggregates"] = reports.back().aggregates;
        summary.push_back(std::move(row));
    }
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        std::ofstream out(out_dir / "sweep.json");
        if (!out) throw Error("cannot write sweep.json");
        ojson j;
        j["parameter"] = parameter;
        j["points"] = std::move(summary);
        out << j.dump(2) << "\n";
    }
    return reports;
}

// ---------------------------------------------------------------------------
// experiment presets

ojson experiment_preset(const std::string& name) {
    auto direction = [](const std::string& id, std::uint64_t seed) {
        ojson j;
        j["id"] = id;
        j["kind"] = "direction";
        j["scenario"] = "preset:" + id;
        j["trials"] = 10;
        j["seed"] = seed;
        j["no_motion_threshold"] = 0.75;
        return j;
    };
    if (name == "benchmark_angles") return direction(name, 101);
    if (name == "benchmark_distance") return direction(name, 102);
    if (name == "benchmark_separation") return direction(name, 103);
    if (name == "living_room_multitarget") {
        ojson j;
        j["id"] = name;
        j["kind"] = "respiration";
        j["scenario"] = "preset:" + name;
        j["directions"] = {-20.0, 0.0, 20.0};
        j["trials"] = 10;
        j["seed"] = 104;
        return j;
    }
    if (name == "fan_interference") {
        ojson j;
        j["id"] = name;
        j["kind"] = "respiration";
        j["scenario"] = "preset:" + name;
        j["directions"] = {15.0};
        j["trials"] = 10;
        j["seed"] = 105;
        return j;
    }
    if (name == "bedroom") {
        ojson j;
        j["id"] = name;
        j["kind"] = "respiration";
        j["scenario"] = "preset:" + name;
        j["directions"] = {20.0};
        j["trials"] = 5;
        j["seed"] = 106;
        return j;
    }
    if (name == "corner_regions") {
        ojson j;
        j["id"] = name;
        j["kind"] = "region";
        j["generator"] = "corner_regions";
        j["trials"] = 10;
        j["seed"] = 107;
        j["no_motion_threshold"] = 0.75;
        return j;
    }
    if (name == "three_rooms") {
        ojson j;
        j["id"] = name;
        j["kind"] = "region";
        j["generator"] = "three_rooms";
        j["trials"] = 10;
        j["seed"] = 108;
        j["no_motion_threshold"] = 0.75;
        return j;
    }
    throw InvalidInput("unknown experiment preset '" + name + "'");
}

std::vector<std::string> experiment_preset_names() {
    return {"benchmark_angles",        "benchmark_distance", "benchmark_separation",
            "living_room_multitarget", "fan_interference",   "bedroom",
            "corner_regions",          "three_rooms"};
}

ojson load_experiment_config(const std::string& ref) {
    if (ref.rfind("preset:", 0) == 0) return experiment_preset(ref.substr(7));
    std::ifstream in(ref);
    if (!in) throw ParseError("cannot open config file: " + ref);
    ojson j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("config JSON: " + std::string(e.what()));
    }
    return j;
}

} // namespace fsasense
