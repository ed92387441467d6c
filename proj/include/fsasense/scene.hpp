#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fsasense/common.hpp"
#include "fsasense/dispersion.hpp"

namespace fsasense {

/// Plan-view transceiver layout. Angles are measured from the antenna
/// boresight, counterclockwise positive, and wrapped to (-180, 180].
struct Geometry {
    Vec2 tx{0.0, 0.0};
    double boresight_deg = 0.0;
    std::array<Vec2, 2> rx{Vec2{0.0, 1.0}, Vec2{0.0, 1.027}};
};

/// Half-wavelength receive-antenna spacing at 5.57 GHz.
inline constexpr double kDefaultRxSeparation = 0.027;

struct LinearMotion {
    Vec2 start;
    Vec2 velocity; // m/s
};

struct Oscillation {
    Vec2 center;
    Vec2 axis;          // unit vector
    double amplitude;   // m
    double period;      // s
};

struct Breathing {
    Vec2 position;
    double displacement_amplitude = 0.005; // m, chest-motion surrogate
    double rate_bpm = 15.0;
};

struct Stationary {
    Vec2 position;
};

using Trajectory = std::variant<LinearMotion, Oscillation, Breathing, Stationary>;

struct Target {
    Trajectory trajectory;
    double reflectivity = 1.0; // dimensionless amplitude at 1 m path
};

/// Static path described by the three quantities that enter the channel:
/// arrival angle relative to boresight, excess path over the LoS, amplitude.
struct Reflector {
    double angle_deg = 0.0;
    double excess_path = 0.0; // m
    double amplitude = 0.0;
};

enum class OffsetModel { none, per_packet_random };

struct Scenario {
    std::string id = "inline";
    Geometry geometry;
    std::vector<Reflector> reflectors;
    std::vector<Target> targets;
    double duration = 10.0;     // s
    double sample_rate = 200.0; // Hz, packet rate
    double noise_sigma = 0.0;   // per-sample complex noise std
    std::optional<double> snr_db; // when set, overrides noise_sigma (see resolved_noise_sigma)
    OffsetModel offset_model = OffsetModel::none;
    std::uint64_t rng_seed = 0;
    double falloff_exponent = 2.0; // reflection amplitude ~ 1/path^exponent

    std::size_t num_samples() const {
        return static_cast<std::size_t>(duration * sample_rate + 0.5);
    }
};

/// Target position at time t (Breathing displaces along the tx-target ray).
Vec2 target_position(const Scenario& s, std::size_t target_index, double t);

/// Target angle relative to tx and boresight, degrees in (-180, 180].
double target_angle_at(const Scenario& s, std::size_t target_index, double t);

/// Round-trip path tx -> target -> rx in meters.
double dynamic_path_length(const Scenario& s, std::size_t target_index, int rx_index, double t);

/// Dynamic-component amplitude of a target: reflectivity / path^falloff_exponent.
double target_amplitude(const Scenario& s, std::size_t target_index, int rx_index, double t);

/// Noise std after applying the optional snr_db rule: sigma such that the
/// first target's amplitude at t=0 (rx 0) sits snr_db above the noise.
double resolved_noise_sigma(const Scenario& s);

struct ValidationReport {
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
    bool ok() const { return errors.empty(); }
};

/// Check all invariants; with a map, also warn when a target leaves the
/// field of view at any sampled instant.
ValidationReport validate(const Scenario& s, const FrequencyAngleMap* fov = nullptr);

// Scenario files are JSON; see README for the schema. Unknown keys are
// rejected rather than ignored.
Scenario load_scenario(const std::filesystem::path& path);
Scenario scenario_from_json_text(const std::string& text, const std::string& id);
void save_scenario(const Scenario& s, const std::filesystem::path& path);
std::string scenario_to_json_text(const Scenario& s);

/// Built-in scenes: benchmark_angles, benchmark_distance, benchmark_separation,
/// living_room_multitarget, fan_interference, bedroom.
Scenario preset_scenario(const std::string& name);
std::vector<std::string> preset_scenario_names();

} // namespace fsasense
