#pragma once

// The 15-DoF hand: DoF naming, valve channel mapping, angle <-> pressure
// vectors and constant-curvature fingertip kinematics.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Geometry>

#include "softhand/actuator.hpp"
#include "softhand/pose.hpp"

namespace softhand::hand {

// Declaration order is the default valve channel order.
enum class DofId : std::uint8_t {
    index_mcp_flex,
    index_dippip_flex,
    middle_mcp_flex,
    middle_dippip_flex,
    ring_mcp_flex,
    ring_dippip_flex,
    pinky_mcp_flex,
    pinky_dippip_flex,
    spread_1,
    spread_2,
    spread_3,
    thumb_mcp_flex,
    thumb_ip_flex,
    thumb_mcp_spread,
    thumb_cmc_oppose,
};

inline constexpr std::size_t kDofCount = 15;
inline constexpr std::size_t kChannelCount = 16;
inline constexpr double kMaxChannelPressure = actuator::kHardwareMaxPressure;

enum class Finger : std::uint8_t { index, middle, ring, pinky, thumb };
inline constexpr std::size_t kFingerCount = 5;

enum class DofKind { flexion, spread, opposition };

constexpr std::size_t index_of(DofId id) { return static_cast<std::size_t>(id); }
constexpr std::size_t index_of(Finger f) { return static_cast<std::size_t>(f); }

const std::array<DofId, kDofCount>& all_dofs();
std::string_view dof_name(DofId id);
std::optional<DofId> dof_from_name(std::string_view name);
DofKind dof_kind(DofId id);
std::string_view finger_name(Finger f);
std::optional<Finger> finger_from_name(std::string_view name);

struct HandState {
    std::array<double, kDofCount> angles{};

    double& operator[](DofId id) { return angles[index_of(id)]; }
    double operator[](DofId id) const { return angles[index_of(id)]; }
    bool operator==(const HandState&) const = default;
};

// Channel 15 is not wired and always reads 0.
struct PressureVector {
    std::array<double, kChannelCount> channels{};

    double& operator[](std::size_t ch) { return channels[ch]; }
    double operator[](std::size_t ch) const { return channels[ch]; }
    bool operator==(const PressureVector&) const = default;
};

struct FingerGeometry {
    double proximal_length = 45.0;  // MCP segment, mm
    double distal_length = 45.0;    // DIP+PIP segment, mm
    Pose root;                      // finger base in the palm frame
};

// Palm frame: x toward the pinky side, y toward the fingertips, z out of the
// back of the hand. Fingers curl toward -z.
struct HandGeometry {
    std::array<FingerGeometry, kFingerCount> fingers;
    std::array<actuator::CalibrationCurve, kDofCount> curves;
    std::array<double, kDofCount> limits{};  // deg
    std::array<int, kDofCount> channels{};   // DoF -> valve channel

    static HandGeometry defaults();

    const FingerGeometry& finger(Finger f) const { return fingers[index_of(f)]; }
    const actuator::CalibrationCurve& curve(DofId id) const { return curves[index_of(id)]; }
    double limit(DofId id) const { return limits[index_of(id)]; }
    int channel(DofId id) const { return channels[index_of(id)]; }
    std::optional<DofId> dof_on_channel(int channel) const;

    // Throws InputError: non-bijective channel map, non-positive segment,
    // coincident finger roots, invalid curve or limit.
    void validate() const;
};

double default_limit(DofId id);

// Throws InputError naming the first DoF that is negative or over its limit.
void check_limits(const HandState& state, const HandGeometry& geom);

// Clamps every angle into [0, limit]; returns how many angles were changed.
std::size_t clamp_to_limits(HandState& state, const HandGeometry& geom);

PressureVector hand_to_pressures(const HandState& state, const HandGeometry& geom);

// Negative channel readings are treated as 0; angles are clamped at the joint limit.
HandState pressures_to_hand(const PressureVector& pressures, const HandGeometry& geom);

// In-plane tip displacement of one constant-curvature segment of length
// `length` bent by `phi_rad`: x along the bending direction, y along the
// undeformed segment axis.
Eigen::Vector2d arc_displacement(double length, double phi_rad);

// Tip of a two-segment finger in its flexion plane (same axes as arc_displacement).
Eigen::Vector2d planar_tip(double proximal_length, double proximal_rad, double distal_length,
                           double distal_rad);

std::array<Eigen::Vector3d, kFingerCount> fingertip_positions(const HandState& state,
                                                              const HandGeometry& geom);

const std::vector<std::string>& preset_names();

// Throws InputError listing the valid names for an unknown preset.
HandState preset_pose(std::string_view name);

}  // namespace softhand::hand
