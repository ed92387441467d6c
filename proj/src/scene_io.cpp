#include <fstream>

#include <json.hpp>

#include "fsasense/scene.hpp"

namespace fsasense {

using json = nlohmann::ordered_json;

namespace {

void reject_unknown(const json& j, const std::string& path,
                    std::initializer_list<const char*> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) { known = true; break; }
        if (!known) throw ParseError(path + ": unknown field '" + it.key() + "'");
    }
}

const json& require(const json& j, const std::string& path, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(path + ": missing required field '" + key + "'");
    return *it;
}

double num(const json& j, const std::string& path) {
    if (!j.is_number()) throw ParseError(path + ": expected a number");
    return j.get<double>();
}

Vec2 vec2(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2)
        throw ParseError(path + ": expected [x, y]");
    return {num(j[0], path + "[0]"), num(j[1], path + "[1]")};
}

Trajectory parse_trajectory(const json& j, const std::string& path) {
    if (!j.is_object()) throw ParseError(path + ": expected an object");
    std::string type = require(j, path, "type").get<std::string>();
    if (type == "linear") {
        reject_unknown(j, path, {"type", "start", "velocity"});
        return LinearMotion{vec2(require(j, path, "start"), path + ".start"),
                            vec2(require(j, path, "velocity"), path + ".velocity")};
    }
    if (type == "oscillation") {
        reject_unknown(j, path, {"type", "center", "axis", "amplitude", "period"});
        return Oscillation{vec2(require(j, path, "center"), path + ".center"),
                           vec2(require(j, path, "axis"), path + ".axis"),
                           num(require(j, path, "amplitude"), path + ".amplitude"),
                           num(require(j, path, "period"), path + ".period")};
    }
    if (type == "breathing") {
        reject_unknown(j, path, {"type", "position", "displacement_amplitude", "rate_bpm"});
        Breathing b;
        b.position = vec2(require(j, path, "position"), path + ".position");
        if (j.contains("displacement_amplitude"))
            b.displacement_amplitude = num(j["displacement_amplitude"], path + ".displacement_amplitude");
        b.rate_bpm = num(require(j, path, "rate_bpm"), path + ".rate_bpm");
        return b;
    }
    if (type == "stationary") {
        reject_unknown(j, path, {"type", "position"});
        return Stationary{vec2(require(j, path, "position"), path + ".position")};
    }
    throw ParseError(path + ".type: unknown trajectory type '" + type + "'");
}

json trajectory_to_json(const Trajectory& t) {
    json j;
    if (const auto* lin = std::get_if<LinearMotion>(&t)) {
        j["type"] = "linear";
        j["start"] = {lin->start.x, lin->start.y};
        j["velocity"] = {lin->velocity.x, lin->velocity.y};
    } else if (const auto* osc = std::get_if<Oscillation>(&t)) {
        j["type"] = "oscillation";
        j["center"] = {osc->center.x, osc->center.y};
        j["axis"] = {osc->axis.x, osc->axis.y};
        j["amplitude"] = osc->amplitude;
        j["period"] = osc->period;
    } else if (const auto* br = std::get_if<Breathing>(&t)) {
        j["type"] = "breathing";
        j["position"] = {br->position.x, br->position.y};
        j["displacement_amplitude"] = br->displacement_amplitude;
        j["rate_bpm"] = br->rate_bpm;
    } else {
        const auto& st = std::get<Stationary>(t);
        j["type"] = "stationary";
        j["position"] = {st.position.x, st.position.y};
    }
    return j;
}

Scenario parse_scenario(const json& j, const std::string& fallback_id) {
    if (!j.is_object()) throw ParseError("scenario: expected a JSON object");
    reject_unknown(j, "scenario",
                   {"id", "geometry", "reflectors", "targets", "duration", "sample_rate",
                    "noise_sigma", "snr_db", "offset_model", "seed", "falloff_exponent"});
    Scenario s;
    s.id = j.contains("id") ? j["id"].get<std::string>() : fallback_id;

    if (j.contains("geometry")) {
        const json& g = j["geometry"];
        reject_unknown(g, "scenario.geometry", {"tx", "boresight_deg", "rx"});
        if (g.contains("tx")) s.geometry.tx = vec2(g["tx"], "scenario.geometry.tx");
        if (g.contains("boresight_deg"))
            s.geometry.boresight_deg = num(g["boresight_deg"], "scenario.geometry.boresight_deg");
        if (g.contains("rx")) {
            const json& rx = g["rx"];
            if (!rx.is_array() || rx.size() != 2)
                throw ParseError("scenario.geometry.rx: expected two [x, y] points");
            s.geometry.rx[0] = vec2(rx[0], "scenario.geometry.rx[0]");
            s.geometry.rx[1] = vec2(rx[1], "scenario.geometry.rx[1]");
        }
    }

    if (j.contains("reflectors")) {
        const json& arr = j["reflectors"];
        if (!arr.is_array()) throw ParseError("scenario.reflectors: expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            std::string p = "scenario.reflectors[" + std::to_string(i) + "]";
            reject_unknown(arr[i], p, {"angle_deg", "excess_path", "amplitude"});
            Reflector r;
            r.angle_deg = num(require(arr[i], p, "angle_deg"), p + ".angle_deg");
            r.excess_path = num(require(arr[i], p, "excess_path"), p + ".excess_path");
            r.amplitude = num(require(arr[i], p, "amplitude"), p + ".amplitude");
            s.reflectors.push_back(r);
        }
    }

    if (j.contains("targets")) {
        const json& arr = j["targets"];
        if (!arr.is_array()) throw ParseError("scenario.targets: expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            std::string p = "scenario.targets[" + std::to_string(i) + "]";
            reject_unknown(arr[i], p, {"trajectory", "reflectivity"});
            Target t;
            t.trajectory = parse_trajectory(require(arr[i], p, "trajectory"), p + ".trajectory");
            if (arr[i].contains("reflectivity"))
                t.reflectivity = num(arr[i]["reflectivity"], p + ".reflectivity");
            s.targets.push_back(t);
        }
    }

    if (j.contains("duration")) s.duration = num(j["duration"], "scenario.duration");
    if (j.contains("sample_rate")) s.sample_rate = num(j["sample_rate"], "scenario.sample_rate");
    if (j.contains("noise_sigma")) s.noise_sigma = num(j["noise_sigma"], "scenario.noise_sigma");
    if (j.contains("snr_db")) s.snr_db = num(j["snr_db"], "scenario.snr_db");
    if (j.contains("offset_model")) {
        std::string m = j["offset_model"].get<std::string>();
        if (m == "none")
            s.offset_model = OffsetModel::none;
        else if (m == "per-packet-random")
            s.offset_model = OffsetModel::per_packet_random;
        else
            throw ParseError("scenario.offset_model: expected 'none' or 'per-packet-random'");
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
            throw ParseError("scenario.seed: expected an integer");
        s.rng_seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("falloff_exponent"))
        s.falloff_exponent = num(j["falloff_exponent"], "scenario.falloff_exponent");
    return s;
}

} // namespace

Scenario scenario_from_json_text(const std::string& text, const std::string& id) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("scenario JSON: ") + e.what());
    }
    return parse_scenario(j, id);
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario file: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return scenario_from_json_text(text, path.stem().string());
}

std::string scenario_to_json_text(const Scenario& s) {
    json j;
    j["id"] = s.id;
    j["geometry"]["tx"] = {s.geometry.tx.x, s.geometry.tx.y};
    j["geometry"]["boresight_deg"] = s.geometry.boresight_deg;
    j["geometry"]["rx"] = {{s.geometry.rx[0].x, s.geometry.rx[0].y},
                           {s.geometry.rx[1].x, s.geometry.rx[1].y}};
    j["reflectors"] = json::array();
    for (const Reflector& r : s.reflectors)
        j["reflectors"].push_back(
            {{"angle_deg", r.angle_deg}, {"excess_path", r.excess_path}, {"amplitude", r.amplitude}});
    j["targets"] = json::array();
    for (const Target& t : s.targets)
        j["targets"].push_back(
            {{"trajectory", trajectory_to_json(t.trajectory)}, {"reflectivity", t.reflectivity}});
    j["duration"] = s.duration;
    j["sample_rate"] = s.sample_rate;
    j["noise_sigma"] = s.noise_sigma;
    if (s.snr_db) j["snr_db"] = *s.snr_db;
    j["offset_model"] = s.offset_model == OffsetModel::none ? "none" : "per-packet-random";
    j["seed"] = s.rng_seed;
    j["falloff_exponent"] = s.falloff_exponent;
    return j.dump(2) + "\n";
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write scenario file: " + path.string());
    out << scenario_to_json_text(s);
}

} // namespace fsasense
