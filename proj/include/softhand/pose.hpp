#pragma once

#include <Eigen/Geometry>
#include <string>

namespace softhand {

// Position in mm plus a unit quaternion, canonicalized to w >= 0.
struct Pose {
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
    Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();

    static Pose identity() { return {}; }

    // Normalizes and canonicalizes the quaternion. Throws InputError on a
    // non-finite field or a zero-norm quaternion.
    static Pose make(const Eigen::Vector3d& position, const Eigen::Quaterniond& orientation);

    // Like make() but keeps the quaternion bits as given: requires
    // |norm - 1| <= 1e-9 and only flips the sign for w < 0.
    static Pose checked(const Eigen::Vector3d& position, const Eigen::Quaterniond& orientation);

    Eigen::Isometry3d transform() const;
    static Pose from_transform(const Eigen::Isometry3d& t);

    bool operator==(const Pose& other) const {
        return position == other.position && orientation.coeffs() == other.orientation.coeffs();
    }
};

// Flip the sign so that w >= 0 (q and -q are the same rotation).
Eigen::Quaterniond canonical(const Eigen::Quaterniond& q);

// Rotation angle (rad) between two orientations, taking the short way round.
double angular_distance(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b);

// Euclidean distance between quaternions, minimized over the sign of b.
double quaternion_distance(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b);

// `x y z qw qx qy qz`, round-trip exact.
std::string format_pose(const Pose& pose);

// Inverse of format_pose. Throws InputError when the text is not seven
// finite numbers or the quaternion has zero norm.
Pose parse_pose(const std::string& text);

}  // namespace softhand
