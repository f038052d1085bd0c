#include "softhand/hand.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "softhand/error.hpp"

namespace softhand::hand {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

constexpr std::array<std::string_view, kDofCount> kDofNames = {
    "index_mcp_flex",  "index_dippip_flex",  "middle_mcp_flex", "middle_dippip_flex",
    "ring_mcp_flex",   "ring_dippip_flex",   "pinky_mcp_flex",  "pinky_dippip_flex",
    "spread_1",        "spread_2",           "spread_3",        "thumb_mcp_flex",
    "thumb_ip_flex",   "thumb_mcp_spread",   "thumb_cmc_oppose",
};

constexpr std::array<std::string_view, kFingerCount> kFingerNames = {"index", "middle", "ring", "pinky",
                                                                     "thumb"};

struct FingerDofs {
    DofId proximal;
    DofId distal;
    std::optional<DofId> spread;
    double spread_sign;  // +1 rotates the finger toward -x (thumb side)
};

constexpr std::array<FingerDofs, kFingerCount> kFingerDofs = {{
    {DofId::index_mcp_flex, DofId::index_dippip_flex, DofId::spread_1, +1.0},
    {DofId::middle_mcp_flex, DofId::middle_dippip_flex, std::nullopt, 0.0},
    {DofId::ring_mcp_flex, DofId::ring_dippip_flex, DofId::spread_2, -1.0},
    {DofId::pinky_mcp_flex, DofId::pinky_dippip_flex, DofId::spread_3, -1.0},
    {DofId::thumb_mcp_flex, DofId::thumb_ip_flex, DofId::thumb_mcp_spread, +1.0},
}};

Pose root_at(double x, double y, double z, double yaw_deg = 0.0) {
    return Pose::make({x, y, z}, Eigen::Quaterniond(Eigen::AngleAxisd(yaw_deg * kDegToRad,
                                                                      Eigen::Vector3d::UnitZ())));
}

}  // namespace

const std::array<DofId, kDofCount>& all_dofs() {
    static const std::array<DofId, kDofCount> dofs = [] {
        std::array<DofId, kDofCount> out{};
        for (std::size_t i = 0; i < kDofCount; ++i) out[i] = static_cast<DofId>(i);
        return out;
    }();
    return dofs;
}

std::string_view dof_name(DofId id) { return kDofNames[index_of(id)]; }

std::optional<DofId> dof_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kDofCount; ++i)
        if (kDofNames[i] == name) return static_cast<DofId>(i);
    return std::nullopt;
}

DofKind dof_kind(DofId id) {
    switch (id) {
        case DofId::spread_1:
        case DofId::spread_2:
        case DofId::spread_3:
        case DofId::thumb_mcp_spread:
            return DofKind::spread;
        case DofId::thumb_cmc_oppose:
            return DofKind::opposition;
        default:
            return DofKind::flexion;
    }
}

std::string_view finger_name(Finger f) { return kFingerNames[index_of(f)]; }

std::optional<Finger> finger_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kFingerCount; ++i)
        if (kFingerNames[i] == name) return static_cast<Finger>(i);
    return std::nullopt;
}

double default_limit(DofId id) {
    switch (dof_kind(id)) {
        case DofKind::flexion:
            return 180.0;
        case DofKind::spread:
            return 30.0;
        case DofKind::opposition:
            return 90.0;
    }
    return 0.0;
}

HandGeometry HandGeometry::defaults() {
    HandGeometry g;
    g.fingers[index_of(Finger::index)] = {45.0, 45.0, root_at(-30.0, 80.0, 0.0)};
    g.fingers[index_of(Finger::middle)] = {45.0, 45.0, root_at(-10.0, 85.0, 0.0)};
    g.fingers[index_of(Finger::ring)] = {45.0, 45.0, root_at(10.0, 80.0, 0.0)};
    g.fingers[index_of(Finger::pinky)] = {45.0, 45.0, root_at(30.0, 72.0, 0.0)};
    g.fingers[index_of(Finger::thumb)] = {35.0, 35.0, root_at(-35.0, 30.0, -15.0, 45.0)};
    for (DofId id : all_dofs()) {
        g.limits[index_of(id)] = default_limit(id);
        g.channels[index_of(id)] = static_cast<int>(index_of(id));
    }
    return g;
}

std::optional<DofId> HandGeometry::dof_on_channel(int ch) const {
    for (DofId id : all_dofs())
        if (channel(id) == ch) return id;
    return std::nullopt;
}

void HandGeometry::validate() const {
    std::array<bool, kChannelCount> used{};
    for (DofId id : all_dofs()) {
        const int ch = channel(id);
        if (ch < 0 || ch >= static_cast<int>(kDofCount))
            throw InputError("channel for " + std::string(dof_name(id)) + " must be in 0..14");
        if (used[static_cast<std::size_t>(ch)])
            throw InputError("channel " + std::to_string(ch) + " assigned to more than one DoF");
        used[static_cast<std::size_t>(ch)] = true;
        curve(id).validate();
        if (!(limit(id) > 0.0) || !std::isfinite(limit(id)))
            throw InputError("joint limit for " + std::string(dof_name(id)) + " must be > 0");
    }
    for (std::size_t i = 0; i < kFingerCount; ++i) {
        const auto& f = fingers[i];
        if (!(f.proximal_length > 0.0) || !(f.distal_length > 0.0))
            throw InputError("segment lengths for " + std::string(kFingerNames[i]) + " must be > 0");
        for (std::size_t j = 0; j < i; ++j)
            if ((fingers[j].root.position - f.root.position).norm() < 1e-9)
                throw InputError("finger roots " + std::string(kFingerNames[j]) + " and " +
                                 std::string(kFingerNames[i]) + " coincide");
    }
}

void check_limits(const HandState& state, const HandGeometry& geom) {
    for (DofId id : all_dofs()) {
        const double a = state[id];
        if (!(a >= 0.0 && a <= geom.limit(id)))
            throw InputError(std::string(dof_name(id)) + " angle " + std::to_string(a) +
                             " outside [0, " + std::to_string(geom.limit(id)) + "]");
    }
}

std::size_t clamp_to_limits(HandState& state, const HandGeometry& geom) {
    std::size_t changed = 0;
    for (DofId id : all_dofs()) {
        double& a = state[id];
        const double clamped = std::isnan(a) ? 0.0 : std::clamp(a, 0.0, geom.limit(id));
        if (clamped != a) {
            a = clamped;
            ++changed;
        }
    }
    return changed;
}

PressureVector hand_to_pressures(const HandState& state, const HandGeometry& geom) {
    check_limits(state, geom);
    PressureVector out;
    for (DofId id : all_dofs())
        out[static_cast<std::size_t>(geom.channel(id))] = actuator::angle_to_pressure(geom.curve(id), state[id]);
    return out;
}

HandState pressures_to_hand(const PressureVector& pressures, const HandGeometry& geom) {
    HandState out;
    for (DofId id : all_dofs()) {
        const double p = pressures[static_cast<std::size_t>(geom.channel(id))];
        const double angle = actuator::pressure_to_angle(geom.curve(id), p > 0.0 ? p : 0.0);
        out[id] = std::min(angle, geom.limit(id));
    }
    return out;
}

Eigen::Vector2d arc_displacement(double length, double phi_rad) {
    if (phi_rad == 0.0) return {0.0, length};
    const double radius = length / phi_rad;
    const double half_sin = std::sin(phi_rad / 2.0);
    // 1 - cos(phi) written as 2 sin^2(phi/2) to keep precision near phi = 0.
    return {2.0 * radius * half_sin * half_sin, radius * std::sin(phi_rad)};
}

Eigen::Vector2d planar_tip(double proximal_length, double proximal_rad, double distal_length,
                           double distal_rad) {
    const Eigen::Vector2d first = arc_displacement(proximal_length, proximal_rad);
    const Eigen::Vector2d second = arc_displacement(distal_length, distal_rad);
    const double c = std::cos(proximal_rad);
    const double s = std::sin(proximal_rad);
    // The distal segment starts tangent to the end of the proximal arc.
    return {first.x() + second.x() * c + second.y() * s, first.y() - second.x() * s + second.y() * c};
}

std::array<Eigen::Vector3d, kFingerCount> fingertip_positions(const HandState& state,
                                                              const HandGeometry& geom) {
    check_limits(state, geom);
    std::array<Eigen::Vector3d, kFingerCount> tips;
    for (std::size_t i = 0; i < kFingerCount; ++i) {
        const FingerDofs& dofs = kFingerDofs[i];
        const FingerGeometry& finger = geom.fingers[i];
        const Eigen::Vector2d in_plane =
            planar_tip(finger.proximal_length, state[dofs.proximal] * kDegToRad, finger.distal_length,
                       state[dofs.distal] * kDegToRad);
        // Finger frame: y along the straight finger, bending toward -z.
        Eigen::Vector3d local(0.0, in_plane.y(), -in_plane.x());
        if (static_cast<Finger>(i) == Finger::thumb) {
            // Opposition turns the thumb's flexion plane about its own axis toward the palm.
            local = Eigen::AngleAxisd(-state[DofId::thumb_cmc_oppose] * kDegToRad, Eigen::Vector3d::UnitY()) *
                    local;
        }
        if (dofs.spread) {
            local = Eigen::AngleAxisd(dofs.spread_sign * state[*dofs.spread] * kDegToRad,
                                      Eigen::Vector3d::UnitZ()) *
                    local;
        }
        tips[i] = finger.root.transform() * local;
    }
    return tips;
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {"open",   "fist",      "pinch",  "point",
                                                   "spread", "thumbs_up", "opposed"};
    return names;
}

HandState preset_pose(std::string_view name) {
    HandState s;
    auto set_finger_flexion = [&s](double angle) {
        for (DofId id : {DofId::index_mcp_flex, DofId::index_dippip_flex, DofId::middle_mcp_flex,
                         DofId::middle_dippip_flex, DofId::ring_mcp_flex, DofId::ring_dippip_flex,
                         DofId::pinky_mcp_flex, DofId::pinky_dippip_flex})
            s[id] = angle;
    };
    if (name == "open") return s;
    if (name == "fist") {
        set_finger_flexion(default_limit(DofId::index_mcp_flex));
        s[DofId::thumb_mcp_flex] = default_limit(DofId::thumb_mcp_flex);
        s[DofId::thumb_ip_flex] = default_limit(DofId::thumb_ip_flex);
        return s;
    }
    if (name == "pinch") {
        // Index and thumb tips meet about 1 mm apart with the default geometry.
        s[DofId::index_mcp_flex] = 90.0;
        s[DofId::index_dippip_flex] = 110.0;
        s[DofId::thumb_mcp_flex] = 90.0;
        s[DofId::thumb_ip_flex] = 10.0;
        s[DofId::thumb_mcp_spread] = 15.0;
        s[DofId::thumb_cmc_oppose] = 50.0;
        return s;
    }
    if (name == "point") {
        set_finger_flexion(180.0);
        s[DofId::index_mcp_flex] = 0.0;
        s[DofId::index_dippip_flex] = 0.0;
        s[DofId::thumb_mcp_flex] = 60.0;
        s[DofId::thumb_ip_flex] = 60.0;
        s[DofId::thumb_cmc_oppose] = 45.0;
        return s;
    }
    if (name == "spread") {
        for (DofId id : {DofId::spread_1, DofId::spread_2, DofId::spread_3, DofId::thumb_mcp_spread})
            s[id] = default_limit(id);
        return s;
    }
    if (name == "thumbs_up") {
        set_finger_flexion(180.0);
        return s;
    }
    if (name == "opposed") {
        s[DofId::thumb_cmc_oppose] = default_limit(DofId::thumb_cmc_oppose);
        return s;
    }
    std::string valid;
    for (const auto& n : preset_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw InputError("unknown preset '" + std::string(name) + "'; valid presets: " + valid);
}

}  // namespace softhand::hand
