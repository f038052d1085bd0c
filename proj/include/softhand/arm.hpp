#pragma once

// End-effector pose follower standing in for a commercial arm: no joints,
// just rate-limited tracking of a commanded pose, plus its line protocol.

#include <string>
#include <string_view>
#include <variant>

#include "softhand/pose.hpp"

namespace softhand::arm {

struct Workspace {
    Eigen::Vector3d min{-350.0, -350.0, 0.0};
    Eigen::Vector3d max{350.0, 350.0, 700.0};

    bool contains(const Eigen::Vector3d& p) const {
        return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
    }
};

struct ArmLimits {
    double v_max = 250.0;  // mm/s
    double w_max = 180.0;  // deg/s
    Workspace workspace;

    void validate() const;
};

inline Pose default_home() { return Pose::make({0.0, 0.0, 350.0}, Eigen::Quaterniond::Identity()); }

struct ArmState {
    Pose current;
    Pose target;
    ArmLimits limits;
};

// Straight-line translation at <= v_max and shortest-arc rotation at
// <= w_max; each snaps to the target once inside one step's budget.
ArmState step_arm(const ArmState& state, double dt);

// Wire protocol, one message per '\n'-terminated line.
namespace protocol {

struct Move {
    Pose pose;
};
struct Get {};
struct Target {};
struct Home {};

using Command = std::variant<Move, Get, Target, Home>;

// Throws InputError when the line is not a valid command.
Command parse(std::string_view line);

inline constexpr std::string_view kOk = "OK";
inline constexpr std::string_view kErrWorkspace = "ERR workspace";
inline constexpr std::string_view kErrParse = "ERR parse";

std::string format(const Command& command);

}  // namespace protocol

// Owns one simulated arm. Not thread safe; the server serializes access.
class ArmFollower {
  public:
    ArmFollower(Pose home, ArmLimits limits);

    // Applies one protocol line and returns the reply line (no newline).
    std::string handle(std::string_view line);

    void step(double dt) { state_ = step_arm(state_, dt); }
    const ArmState& state() const { return state_; }
    const Pose& home() const { return home_; }

  private:
    Pose home_;
    ArmState state_;
};

}  // namespace softhand::arm
