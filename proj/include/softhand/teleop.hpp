#pragma once

// Operator -> robot retargeting: frame alignment from paired start poses,
// per-frame wrist retargeting and hand-angle -> pressure conversion.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "softhand/hand.hpp"
#include "softhand/pose.hpp"

namespace softhand::teleop {

struct TrackedFrame {
    double t = 0.0;  // s
    Pose wrist;      // tracker frame
    hand::HandState hand;

    bool operator==(const TrackedFrame&) const = default;
};

// Rigid transform taking tracker-frame poses to robot-frame poses.
struct FrameAlignment {
    Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    static FrameAlignment identity() { return {}; }
    Eigen::Matrix3d rotation_matrix() const { return rotation.toRotationMatrix(); }
    Eigen::Isometry3d transform() const;
};

// A = T(robot_start) * T(human_start)^-1.
FrameAlignment calibrate(const Pose& human_start, const Pose& robot_start);

Pose retarget_pose(const FrameAlignment& alignment, const Pose& human);

struct FrameCommands {
    Pose arm_target;
    hand::PressureVector pressures;
    std::size_t clamped = 0;  // angles pulled back into joint limits
};

FrameCommands frame_to_commands(const TrackedFrame& frame, const FrameAlignment& alignment,
                                const hand::HandGeometry& geom);

// Exponential smoothing of successive retargeted poses; alpha in (0, 1],
// 1 passes poses through unchanged.
class PoseSmoother {
  public:
    explicit PoseSmoother(double alpha);
    Pose update(const Pose& pose);
    void reset() { last_.reset(); }

  private:
    double alpha_;
    std::optional<Pose> last_;
};

// Trajectory files: JSON Lines, one frame object per line.
nlohmann::json frame_to_json(const TrackedFrame& frame);

// Throws ParseError naming `line` and the offending field.
TrackedFrame frame_from_json(const nlohmann::json& j, std::size_t line);

// Throws ParseError (bad record, non-increasing timestamp) or Error (I/O).
std::vector<TrackedFrame> load_trajectory(const std::filesystem::path& path);
std::vector<TrackedFrame> parse_trajectory(const std::string& text);
void save_trajectory(const std::vector<TrackedFrame>& frames, const std::filesystem::path& path);

nlohmann::json pose_to_json(const Pose& pose);
// Throws InputError when fields are missing or not finite.
Pose pose_from_json(const nlohmann::json& j);

}  // namespace softhand::teleop
