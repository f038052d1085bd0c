#pragma once

// Stack configuration: one JSON file with documented keys (docs/config.md).
// Absent keys take defaults that reproduce the reference stack; unknown keys
// are rejected with the offending key path.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "softhand/arm.hpp"
#include "softhand/endpoint.hpp"
#include "softhand/hand.hpp"
#include "softhand/valve.hpp"

namespace softhand::config {

inline constexpr const char* kConfigEnvVar = "SOFTHAND_CONFIG";

// One arm with its mounted hand and the valve terminal feeding it.
struct UnitConfig {
    std::string name = "right";
    Endpoint valve{"127.0.0.1", 1502};
    Endpoint arm{"127.0.0.1", 6001};

    bool operator==(const UnitConfig&) const = default;
};

struct StackConfig {
    std::vector<UnitConfig> units{UnitConfig{}};
    double command_rate_hz = 10.0;
    hand::HandGeometry hand = hand::HandGeometry::defaults();
    double valve_tau_s = valve::kDefaultTau;
    double valve_tick_hz = valve::kDefaultTickHz;
    arm::ArmLimits arm_limits;
    Pose arm_home = arm::default_home();
    double arm_tick_hz = 100.0;
    std::optional<double> smoothing_alpha;
    std::uint16_t ui_port = 8080;
    double ui_broadcast_hz = 20.0;

    // Throws ConfigError naming the first key whose value breaks an invariant.
    void validate() const;
};

StackConfig from_json(const nlohmann::json& j);
nlohmann::json to_json(const StackConfig& config);

// Throws ConfigError (bad key or value) or Error (I/O, malformed JSON).
StackConfig load(const std::filesystem::path& path);
void save(const StackConfig& config, const std::filesystem::path& path);

// --config flag, else $SOFTHAND_CONFIG, else none.
std::optional<std::filesystem::path> resolve_path(const std::optional<std::string>& flag);

// Loads the resolved file, or defaults when there is none.
StackConfig load_or_default(const std::optional<std::string>& flag);

}  // namespace softhand::config
