#include "softhand/teleop.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "softhand/error.hpp"

namespace softhand::teleop {

using nlohmann::json;

Eigen::Isometry3d FrameAlignment::transform() const {
    Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
    t.linear() = rotation_matrix();
    t.translation() = translation;
    return t;
}

FrameAlignment calibrate(const Pose& human_start, const Pose& robot_start) {
    FrameAlignment a;
    a.rotation = (robot_start.orientation * human_start.orientation.conjugate()).normalized();
    a.translation = robot_start.position - a.rotation * human_start.position;
    return a;
}

Pose retarget_pose(const FrameAlignment& alignment, const Pose& human) {
    return Pose::make(alignment.rotation * human.position + alignment.translation,
                      alignment.rotation * human.orientation);
}

FrameCommands frame_to_commands(const TrackedFrame& frame, const FrameAlignment& alignment,
                                const hand::HandGeometry& geom) {
    FrameCommands out;
    out.arm_target = retarget_pose(alignment, frame.wrist);
    hand::HandState clamped = frame.hand;
    out.clamped = hand::clamp_to_limits(clamped, geom);
    out.pressures = hand::hand_to_pressures(clamped, geom);
    return out;
}

PoseSmoother::PoseSmoother(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw InputError("smoothing alpha must be in (0, 1]");
}

Pose PoseSmoother::update(const Pose& pose) {
    if (!last_) {
        last_ = pose;
        return pose;
    }
    const Eigen::Vector3d p = last_->position + alpha_ * (pose.position - last_->position);
    const Eigen::Quaterniond q = last_->orientation.slerp(alpha_, pose.orientation);
    last_ = Pose::make(p, q);
    return *last_;
}

json pose_to_json(const Pose& pose) {
    return {{"position", {pose.position.x(), pose.position.y(), pose.position.z()}},
            {"quaternion", {pose.orientation.w(), pose.orientation.x(), pose.orientation.y(), pose.orientation.z()}}};
}

namespace {

std::vector<double> number_array(const json& j, const char* key, std::size_t n) {
    if (!j.contains(key)) throw InputError(std::string("missing '") + key + "'");
    const json& a = j.at(key);
    if (!a.is_array() || a.size() != n) throw InputError(std::string("'") + key + "' must be an array of " + std::to_string(n));
    std::vector<double> out;
    for (const auto& v : a) {
        if (!v.is_number()) throw InputError(std::string("'") + key + "' must hold numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

}  // namespace

Pose pose_from_json(const json& j) {
    if (!j.is_object()) throw InputError("pose must be an object");
    const auto p = number_array(j, "position", 3);
    const auto q = number_array(j, "quaternion", 4);
    return Pose::checked({p[0], p[1], p[2]}, Eigen::Quaterniond(q[0], q[1], q[2], q[3]));
}

json frame_to_json(const TrackedFrame& frame) {
    json angles = json::object();
    for (hand::DofId id : hand::all_dofs()) angles[std::string(hand::dof_name(id))] = frame.hand[id];
    return {{"t", frame.t}, {"wrist", pose_to_json(frame.wrist)}, {"angles", angles}};
}

TrackedFrame frame_from_json(const json& j, std::size_t line) {
    if (!j.is_object()) throw ParseError(line, "<record>", "expected an object");
    TrackedFrame f;
    if (!j.contains("t") || !j.at("t").is_number()) throw ParseError(line, "t", "missing or not a number");
    f.t = j.at("t").get<double>();
    if (!std::isfinite(f.t)) throw ParseError(line, "t", "not finite");
    if (!j.contains("wrist")) throw ParseError(line, "wrist", "missing");
    try {
        f.wrist = pose_from_json(j.at("wrist"));
    } catch (const InputError& e) {
        throw ParseError(line, "wrist", e.what());
    }
    if (!j.contains("angles") || !j.at("angles").is_object()) throw ParseError(line, "angles", "missing or not an object");
    const json& angles = j.at("angles");
    for (hand::DofId id : hand::all_dofs()) {
        const std::string name(hand::dof_name(id));
        const auto it = angles.find(name);
        if (it == angles.end() || !it->is_number()) throw ParseError(line, "angles." + name, "missing or not a number");
        const double v = it->get<double>();
        if (!std::isfinite(v)) throw ParseError(line, "angles." + name, "not finite");
        f.hand[id] = v;
    }
    return f;
}

std::vector<TrackedFrame> parse_trajectory(const std::string& text) {
    std::vector<TrackedFrame> frames;
    std::istringstream in(text);
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(raw);
        } catch (const json::parse_error& e) {
            throw ParseError(line, "<record>", std::string("malformed JSON: ") + e.what());
        }
        TrackedFrame f = frame_from_json(j, line);
        if (!frames.empty() && !(f.t > frames.back().t))
            throw ParseError(line, "t", "timestamp not strictly increasing");
        frames.push_back(f);
    }
    return frames;
}

std::vector<TrackedFrame> load_trajectory(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open trajectory file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_trajectory(buf.str());
}

void save_trajectory(const std::vector<TrackedFrame>& frames, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write trajectory file " + path.string());
    for (const auto& f : frames) out << frame_to_json(f).dump() << '\n';
    if (!out) throw Error("write failed for " + path.string());
}

}  // namespace softhand::teleop
