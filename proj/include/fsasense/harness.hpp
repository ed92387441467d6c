#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fsasense/estimators.hpp"
#include "fsasense/scene.hpp"

namespace fsasense {

using ojson = nlohmann::ordered_json;

inline constexpr int kReportSchemaVersion = 1;
inline constexpr char kOutDirEnvVar[] = "FSASENSE_OUT_DIR";

struct TrialRecord {
    int index = 0;
    std::uint64_t seed = 0;
    ojson details;
};

struct ExperimentReport {
    std::string id;
    std::string kind;
    ojson config; // resolved configuration echo
    std::vector<std::uint64_t> seeds;
    std::vector<TrialRecord> trials;
    ojson aggregates;
    double runtime_s = 0.0; // kept out of to_json so reports stay byte-stable

    ojson to_json() const;
};

/**
 * Run one experiment described by a JSON config (see README for the
 * schema; unknown fields are rejected with their path). Artifacts go
 * under out_dir; pass an empty path to skip writing. Deterministic for a
 * fixed config and seed. On failure every file created so far is removed.
 */
ExperimentReport run_experiment(const ojson& config, const std::filesystem::path& out_dir,
                                std::optional<std::uint64_t> seed_override = {});
ExperimentReport run_experiment(const std::filesystem::path& config_path,
                                const std::filesystem::path& out_dir,
                                std::optional<std::uint64_t> seed_override = {});

struct AntennaComparison {
    ExperimentReport fsa;
    ExperimentReport omni;
    int trials = 0;
    int fsa_better = 0; // per-trial mean error strictly smaller (invalid counts as worst)
    ojson to_json() const;
};

/// Run the same respiration config and seeds through the scanning antenna
/// and the omnidirectional baseline.
AntennaComparison compare_antennas(const ojson& config, const std::filesystem::path& out_dir,
                                   std::optional<std::uint64_t> seed_override = {});

/// One run_experiment per value of the swept parameter, shared base seed.
/// parameter is one of: target_distance, transceiver_separation,
/// noise_sigma, target_speed.
std::vector<ExperimentReport> sweep(const ojson& config, const std::string& parameter,
                                    std::span<const double> values,
                                    const std::filesystem::path& out_dir);

/// Resolve "preset:NAME" or a filesystem path into a config object.
ojson load_experiment_config(const std::string& ref);
ojson experiment_preset(const std::string& name);
std::vector<std::string> experiment_preset_names();

/// Resolve "preset:NAME", a path, or an inline object into a Scenario.
Scenario materialize_scenario(const ojson& spec);

/// Named scenario adjustments used by sweeps and configs. Applied in a
/// fixed order regardless of their order in the JSON object; see README.
void apply_scenario_overrides(Scenario& s, const ojson& overrides);

} // namespace fsasense
