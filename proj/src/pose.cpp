#include "softhand/pose.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <vector>

#include "softhand/error.hpp"

namespace softhand {

Eigen::Quaterniond canonical(const Eigen::Quaterniond& q) {
    if (q.w() < 0.0) return Eigen::Quaterniond(-q.coeffs());
    return q;
}

Pose Pose::make(const Eigen::Vector3d& position, const Eigen::Quaterniond& orientation) {
    if (!position.allFinite() || !orientation.coeffs().allFinite())
        throw InputError("pose fields must be finite");
    const double norm = orientation.norm();
    if (!(norm > 1e-12)) throw InputError("pose quaternion has zero norm");
    Pose p;
    p.position = position;
    p.orientation = canonical(Eigen::Quaterniond(orientation.coeffs() / norm));
    return p;
}

Pose Pose::checked(const Eigen::Vector3d& position, const Eigen::Quaterniond& orientation) {
    if (!position.allFinite() || !orientation.coeffs().allFinite())
        throw InputError("pose fields must be finite");
    if (std::abs(orientation.norm() - 1.0) > 1e-9) throw InputError("pose quaternion is not unit norm");
    Pose p;
    p.position = position;
    p.orientation = canonical(orientation);
    return p;
}

Eigen::Isometry3d Pose::transform() const {
    Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
    t.linear() = orientation.toRotationMatrix();
    t.translation() = position;
    return t;
}

Pose Pose::from_transform(const Eigen::Isometry3d& t) {
    return make(t.translation(), Eigen::Quaterniond(t.rotation()));
}

double angular_distance(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b) {
    const double dot = std::min(1.0, std::abs(a.coeffs().dot(b.coeffs())));
    return 2.0 * std::acos(dot);
}

double quaternion_distance(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b) {
    return std::min((a.coeffs() - b.coeffs()).norm(), (a.coeffs() + b.coeffs()).norm());
}

namespace {

void append_number(std::string& out, double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, end);
}

}  // namespace

std::string format_pose(const Pose& pose) {
    std::string out;
    const double values[7] = {pose.position.x(),    pose.position.y(),    pose.position.z(),
                              pose.orientation.w(), pose.orientation.x(), pose.orientation.y(),
                              pose.orientation.z()};
    for (int i = 0; i < 7; ++i) {
        if (i) out += ' ';
        append_number(out, values[i]);
    }
    return out;
}

Pose parse_pose(const std::string& text) {
    std::vector<double> values;
    const char* p = text.data();
    const char* end = p + text.size();
    while (p < end) {
        while (p < end && (*p == ' ' || *p == '\t')) ++p;
        if (p == end) break;
        double v = 0.0;
        auto [next, ec] = std::from_chars(p, end, v);
        if (ec != std::errc() || (next < end && *next != ' ' && *next != '\t'))
            throw InputError("pose: expected a decimal number");
        values.push_back(v);
        p = next;
    }
    if (values.size() != 7) throw InputError("pose: expected 7 numbers, got " + std::to_string(values.size()));
    const Eigen::Vector3d position(values[0], values[1], values[2]);
    const Eigen::Quaterniond q(values[3], values[4], values[5], values[6]);
    if (std::isfinite(q.norm()) && std::abs(q.norm() - 1.0) <= 1e-9) return Pose::checked(position, q);
    return Pose::make(position, q);
}

}  // namespace softhand
