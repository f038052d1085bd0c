#include "softhand/arm.hpp"

#include <cmath>
#include <numbers>

#include "softhand/error.hpp"

namespace softhand::arm {

namespace {
constexpr double kDegToRad = std::numbers::pi / 180.0;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace

void ArmLimits::validate() const {
    if (!(v_max > 0.0) || !(w_max > 0.0)) throw InputError("arm v_max and w_max must be > 0");
    if (!(workspace.min.array() < workspace.max.array()).all())
        throw InputError("arm workspace min must be below max on every axis");
}

constexpr double kSnapSlack = 1e-9;

ArmState step_arm(const ArmState& state, double dt) {
    if (!(dt > 0.0)) throw InputError("arm step dt must be > 0");
    ArmState next = state;

    const Eigen::Vector3d delta = state.target.position - state.current.position;
    const double distance = delta.norm();
    // The slack absorbs rounding left over from earlier partial steps.
    const double linear_budget = state.limits.v_max * dt;
    if (distance <= linear_budget * (1.0 + kSnapSlack)) {
        next.current.position = state.target.position;
    } else {
        next.current.position = state.current.position + delta * (linear_budget / distance);
    }

    const Eigen::Quaterniond& from = state.current.orientation;
    Eigen::Quaterniond to = state.target.orientation;
    if (from.coeffs().dot(to.coeffs()) < 0.0) to.coeffs() = -to.coeffs();
    const double angle = angular_distance(from, to);
    const double angular_budget = state.limits.w_max * kDegToRad * dt;
    if (angle <= angular_budget * (1.0 + kSnapSlack)) {
        next.current.orientation = state.target.orientation;
    } else {
        Eigen::Quaterniond q = from.slerp(angular_budget / angle, to);
        q.normalize();
        next.current.orientation = canonical(q);
    }
    return next;
}

namespace protocol {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

Command parse(std::string_view line) {
    line = trim(line);
    const auto space = line.find(' ');
    const std::string_view verb = line.substr(0, space);
    const std::string_view rest = space == std::string_view::npos ? std::string_view{} : trim(line.substr(space));
    if (verb == "MOVE") return Move{parse_pose(std::string(rest))};
    if (!rest.empty()) throw InputError("unexpected arguments after " + std::string(verb));
    if (verb == "GET") return Get{};
    if (verb == "TARGET") return Target{};
    if (verb == "HOME") return Home{};
    throw InputError("unknown command '" + std::string(verb) + "'");
}

std::string format(const Command& command) {
    return std::visit(overloaded{
                          [](const Move& m) { return "MOVE " + format_pose(m.pose); },
                          [](const Get&) { return std::string("GET"); },
                          [](const Target&) { return std::string("TARGET"); },
                          [](const Home&) { return std::string("HOME"); },
                      },
                      command);
}

}  // namespace protocol

ArmFollower::ArmFollower(Pose home, ArmLimits limits) : home_(home) {
    limits.validate();
    if (!limits.workspace.contains(home.position)) throw InputError("arm home pose outside workspace");
    state_ = {home, home, limits};
}

std::string ArmFollower::handle(std::string_view line) {
    protocol::Command command;
    try {
        command = protocol::parse(line);
    } catch (const InputError&) {
        return std::string(protocol::kErrParse);
    }
    return std::visit(overloaded{
                          [this](const protocol::Move& m) {
                              if (!state_.limits.workspace.contains(m.pose.position))
                                  return std::string(protocol::kErrWorkspace);
                              state_.target = m.pose;
                              return std::string(protocol::kOk);
                          },
                          [this](const protocol::Get&) { return "STATE " + format_pose(state_.current); },
                          [this](const protocol::Target&) { return "STATE " + format_pose(state_.target); },
                          [this](const protocol::Home&) {
                              state_.target = home_;
                              return std::string(protocol::kOk);
                          },
                      },
                      command);
}

}  // namespace softhand::arm
