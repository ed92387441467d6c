// Command-line front end: scenario simulation, direction estimation,
// respiration monitoring, antenna comparison and parameter sweeps.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime failure.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "fsasense/channel.hpp"
#include "fsasense/harness.hpp"

namespace fs = std::filesystem;
using namespace fsasense;

namespace {

fs::path default_out_dir() {
    if (const char* env = std::getenv(kOutDirEnvVar)) return fs::path(env);
    return fs::path("out");
}

std::vector<double> parse_values(const std::string& csv) {
    std::vector<double> out;
    std::istringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(std::stod(tok));
    }
    return out;
}

void print_aggregates(const ExperimentReport& report) {
    std::cout << report.id << ": " << report.aggregates.dump() << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Direction-aware Wi-Fi sensing simulator (frequency-scanning antenna)"};
    app.require_subcommand(0, 1);

    std::string config_ref;
    std::string out_dir_str;
    std::uint64_t seed = 0;
    bool have_seed = false;
    bool emit_trace = false;
    bool list_presets = false;
    app.add_flag("--list-presets", list_presets, "List scenario and experiment presets and exit");

    auto add_common = [&](CLI::App* cmd, bool with_trace) {
        cmd->add_option("-c,--config", config_ref,
                        "Experiment config: preset:NAME or a JSON file path")
            ->required();
        cmd->add_option("-o,--out", out_dir_str, "Output directory (default $FSASENSE_OUT_DIR or ./out)");
        cmd->add_option("--seed", seed, "Override the base seed")->each([&](const std::string&) {
            have_seed = true;
        });
        if (with_trace) cmd->add_flag("--emit-trace", emit_trace, "Also write per-trial CSI traces");
    };

    CLI::App* sim = app.add_subcommand("simulate", "Synthesize a CSI trace for a scenario");
    bool omni = false;
    sim->add_option("-c,--config", config_ref, "Scenario: preset:NAME or a JSON file path")
        ->required();
    sim->add_option("-o,--out", out_dir_str, "Output directory");
    sim->add_option("--seed", seed, "Override the scenario seed")->each([&](const std::string&) {
        have_seed = true;
    });
    sim->add_flag("--omni", omni, "Use the omnidirectional baseline instead of the FSA");

    CLI::App* est = app.add_subcommand("estimate", "Run a direction or region experiment");
    add_common(est, true);
    CLI::App* resp = app.add_subcommand("respiration", "Run a respiration experiment");
    add_common(resp, true);
    CLI::App* cmp = app.add_subcommand("compare", "FSA vs omnidirectional respiration comparison");
    add_common(cmp, false);
    CLI::App* swp = app.add_subcommand("sweep", "Sweep one scenario parameter");
    add_common(swp, false);
    std::string sweep_param, sweep_values;
    swp->add_option("--param", sweep_param,
                    "target_distance | transceiver_separation | noise_sigma | target_speed")
        ->required();
    swp->add_option("--values", sweep_values, "Comma-separated values")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    if (list_presets) {
        std::cout << "scenario presets:\n";
        for (const auto& n : preset_scenario_names()) std::cout << "  " << n << "\n";
        std::cout << "experiment presets:\n";
        for (const auto& n : experiment_preset_names()) std::cout << "  " << n << "\n";
        return 0;
    }
    if (app.get_subcommands().empty()) {
        std::cerr << app.help();
        return 1;
    }

    fs::path out_dir = out_dir_str.empty() ? default_out_dir() : fs::path(out_dir_str);
    std::optional<std::uint64_t> seed_override;
    if (have_seed) seed_override = seed;

    try {
        if (sim->parsed()) {
            Scenario scen;
            if (config_ref.rfind("preset:", 0) == 0)
                scen = preset_scenario(config_ref.substr(7));
            else
                scen = load_scenario(config_ref);
            if (seed_override) scen.rng_seed = *seed_override;
            auto freqs = uniform_band(kBandLo, kBandHi, kDefaultSubcarriers);
            CsiTrace trace = omni ? omnidirectional_baseline(scen, freqs)
                                  : synthesize(scen, ArrayFactorGain(default_antenna()), freqs);
            fs::create_directories(out_dir);
            write_trace_csv(trace, out_dir / "trace.csv");
            write_trace_meta(trace, out_dir / "trace_meta.json");
            save_scenario(scen, out_dir / "scenario.json");
            std::cout << "wrote " << (out_dir / "trace.csv").string() << " (" << trace.num_times()
                      << " packets x " << trace.num_subcarriers() << " subcarriers)\n";
        } else if (est->parsed() || resp->parsed()) {
            ojson cfg = load_experiment_config(config_ref);
            if (emit_trace) cfg["emit_trace"] = true;
            std::string kind = cfg.contains("kind") ? cfg["kind"].get<std::string>() : "";
            if (est->parsed() && kind != "direction" && kind != "region")
                throw InvalidInput("estimate expects a direction or region config, got '" + kind +
                                   "'");
            if (resp->parsed() && kind != "respiration")
                throw InvalidInput("respiration expects a respiration config, got '" + kind + "'");
            std::string id = cfg.contains("id") ? cfg["id"].get<std::string>() : "experiment";
            ExperimentReport report = run_experiment(cfg, out_dir / id, seed_override);
            print_aggregates(report);
        } else if (cmp->parsed()) {
            ojson cfg = load_experiment_config(config_ref);
            std::string id = cfg.contains("id") ? cfg["id"].get<std::string>() : "experiment";
            AntennaComparison result = compare_antennas(cfg, out_dir / (id + "_compare"), seed_override);
            std::cout << "fsa better in " << result.fsa_better << " of " << result.trials
                      << " trials\n";
            print_aggregates(result.fsa);
            print_aggregates(result.omni);
        } else if (swp->parsed()) {
            ojson cfg = load_experiment_config(config_ref);
            if (seed_override) cfg["seed"] = *seed_override;
            std::vector<double> values = parse_values(sweep_values);
            std::string id = cfg.contains("id") ? cfg["id"].get<std::string>() : "experiment";
            auto reports = sweep(cfg, sweep_param, values, out_dir / (id + "_sweep"));
            for (const auto& r : reports) print_aggregates(r);
        }
    } catch (const ParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const InvalidInput& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
