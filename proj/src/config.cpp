#include "softhand/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "softhand/error.hpp"
#include "softhand/teleop.hpp"

namespace softhand::config {

using nlohmann::json;

namespace {

// Walks one JSON object, remembering its key path for error messages and
// rejecting keys nobody asked for.
class Reader {
  public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    // Call once every expected key has been read.
    void done() const {
        for (const auto& [key, value] : j_.items())
            if (!seen_.count(key)) throw ConfigError(join(key), "unknown key");
    }

    std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json* find(const std::string& key) {
        seen_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void number(const std::string& key, double& out) {
        if (const json* v = find(key)) {
            if (!v->is_number()) throw ConfigError(join(key), "expected a number");
            out = v->get<double>();
            if (!std::isfinite(out)) throw ConfigError(join(key), "must be finite");
        }
    }

    void port(const std::string& key, std::uint16_t& out) {
        if (const json* v = find(key)) {
            if (!v->is_number_integer() || v->get<long long>() < 0 || v->get<long long>() > 65535)
                throw ConfigError(join(key), "expected a port number 0..65535");
            out = static_cast<std::uint16_t>(v->get<long long>());
        }
    }

    void string(const std::string& key, std::string& out) {
        if (const json* v = find(key)) {
            if (!v->is_string()) throw ConfigError(join(key), "expected a string");
            out = v->get<std::string>();
        }
    }

    void vector3(const std::string& key, Eigen::Vector3d& out) {
        if (const json* v = find(key)) {
            if (!v->is_array() || v->size() != 3) throw ConfigError(join(key), "expected [x, y, z]");
            for (std::size_t i = 0; i < 3; ++i) {
                if (!(*v)[i].is_number()) throw ConfigError(join(key), "expected numbers");
                out[static_cast<Eigen::Index>(i)] = (*v)[i].get<double>();
            }
        }
    }

    void pose(const std::string& key, Pose& out) {
        if (const json* v = find(key)) {
            Reader r(*v, join(key));
            Eigen::Vector3d p = out.position;
            r.vector3("position", p);
            Eigen::Quaterniond q = out.orientation;
            if (const json* qj = r.find("quaternion")) {
                if (!qj->is_array() || qj->size() != 4 || !std::all_of(qj->begin(), qj->end(), [](const json& e) {
                        return e.is_number();
                    }))
                    throw ConfigError(r.join("quaternion"), "expected [w, x, y, z]");
                q = Eigen::Quaterniond((*qj)[0].get<double>(), (*qj)[1].get<double>(), (*qj)[2].get<double>(),
                                       (*qj)[3].get<double>());
            }
            try {
                out = Pose::make(p, q);
            } catch (const InputError& e) {
                throw ConfigError(join(key), e.what());
            }
            r.done();
        }
    }

    void endpoint(const std::string& key, Endpoint& out) {
        if (const json* v = find(key)) {
            Reader r(*v, join(key));
            r.string("host", out.host);
            r.port("port", out.port);
            r.done();
        }
    }

    template <class Fn>
    void object(const std::string& key, Fn&& fn) {
        if (const json* v = find(key)) {
            Reader r(*v, join(key));
            fn(r);
            r.done();
        }
    }

    // Object keyed by DoF name; `fn(reader-or-value, id)` per present DoF.
    template <class Fn>
    void per_dof(const std::string& key, Fn&& fn) {
        if (const json* v = find(key)) {
            Reader r(*v, join(key));
            for (hand::DofId id : hand::all_dofs()) {
                const std::string name(hand::dof_name(id));
                if (const json* entry = r.find(name)) fn(r, name, *entry, id);
            }
            r.done();
        }
    }

    const json& raw() const { return j_; }

  private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

json vec3(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }

}  // namespace

void StackConfig::validate() const {
    if (units.empty() || units.size() > 2) throw ConfigError("units", "expected 1 or 2 arm/hand units");
    if (!(command_rate_hz > 0.0)) throw ConfigError("command_rate_hz", "must be > 0");
    if (!(valve_tau_s > 0.0)) throw ConfigError("valve.tau_s", "must be > 0");
    if (!(valve_tick_hz >= 0.0)) throw ConfigError("valve.tick_hz", "must be >= 0");
    if (!(arm_tick_hz >= 0.0)) throw ConfigError("arm.tick_hz", "must be >= 0");
    if (!(ui_broadcast_hz > 0.0)) throw ConfigError("ui.broadcast_hz", "must be > 0");
    if (smoothing_alpha && !(*smoothing_alpha > 0.0 && *smoothing_alpha <= 1.0))
        throw ConfigError("teleop.smoothing_alpha", "must be in (0, 1] or null");
    try {
        arm_limits.validate();
    } catch (const InputError& e) {
        throw ConfigError("arm", e.what());
    }
    if (!arm_limits.workspace.contains(arm_home.position)) throw ConfigError("arm.home", "outside the workspace");
    try {
        hand.validate();
    } catch (const InputError& e) {
        throw ConfigError("hand", e.what());
    }
    for (std::size_t i = 0; i < units.size(); ++i)
        for (std::size_t k = 0; k < i; ++k)
            if (units[i].name == units[k].name) throw ConfigError("units", "duplicate unit name '" + units[i].name + "'");
}

StackConfig from_json(const json& j) {
    StackConfig c;
    {
        Reader root(j, "");
        root.number("command_rate_hz", c.command_rate_hz);

        if (const json* units = root.find("units")) {
            if (!units->is_array()) throw ConfigError("units", "expected an array");
            c.units.clear();
            for (std::size_t i = 0; i < units->size(); ++i) {
                UnitConfig u;
                u.name = i == 0 ? "right" : "left";
                u.valve.port = static_cast<std::uint16_t>(1502 + i);
                u.arm.port = static_cast<std::uint16_t>(6001 + i);
                Reader r((*units)[i], "units[" + std::to_string(i) + "]");
                r.string("name", u.name);
                r.endpoint("valve", u.valve);
                r.endpoint("arm", u.arm);
                r.done();
                c.units.push_back(u);
            }
        }

        root.object("hand", [&c](Reader& h) {
            h.object("fingers", [&c](Reader& fingers) {
                for (std::size_t i = 0; i < hand::kFingerCount; ++i) {
                    const std::string name(hand::finger_name(static_cast<hand::Finger>(i)));
                    fingers.object(name, [&c, i](Reader& f) {
                        f.number("proximal_mm", c.hand.fingers[i].proximal_length);
                        f.number("distal_mm", c.hand.fingers[i].distal_length);
                        f.pose("root", c.hand.fingers[i].root);
                    });
                }
            });
            h.per_dof("channels", [&c](Reader& r, const std::string& name, const json& v, hand::DofId id) {
                if (!v.is_number_integer()) throw ConfigError(r.join(name), "expected an integer channel");
                c.hand.channels[hand::index_of(id)] = v.get<int>();
            });
            h.per_dof("joint_limits_deg", [&c](Reader& r, const std::string& name, const json& v, hand::DofId id) {
                if (!v.is_number()) throw ConfigError(r.join(name), "expected a number");
                c.hand.limits[hand::index_of(id)] = v.get<double>();
            });
            h.per_dof("calibration", [&c](Reader& r, const std::string& name, const json& v, hand::DofId id) {
                Reader curve(v, r.join(name));
                auto& cc = c.hand.curves[hand::index_of(id)];
                curve.number("slope", cc.slope);
                curve.number("max_pressure_mbar", cc.max_pressure);
                curve.done();
            });
        });

        root.object("valve", [&c](Reader& v) {
            v.number("tau_s", c.valve_tau_s);
            v.number("tick_hz", c.valve_tick_hz);
        });
        root.object("arm", [&c](Reader& a) {
            a.number("v_max_mm_s", c.arm_limits.v_max);
            a.number("w_max_deg_s", c.arm_limits.w_max);
            a.vector3("workspace_min_mm", c.arm_limits.workspace.min);
            a.vector3("workspace_max_mm", c.arm_limits.workspace.max);
            a.pose("home", c.arm_home);
            a.number("tick_hz", c.arm_tick_hz);
        });
        root.object("teleop", [&c](Reader& t) {
            if (const json* a = t.find("smoothing_alpha")) {
                if (a->is_null()) {
                    c.smoothing_alpha.reset();
                } else if (a->is_number()) {
                    c.smoothing_alpha = a->get<double>();
                } else {
                    throw ConfigError("teleop.smoothing_alpha", "expected a number or null");
                }
            }
        });
        root.object("ui", [&c](Reader& u) {
            u.port("port", c.ui_port);
            u.number("broadcast_hz", c.ui_broadcast_hz);
        });
        root.done();
    }
    c.validate();
    return c;
}

json to_json(const StackConfig& c) {
    json units = json::array();
    for (const auto& u : c.units)
        units.push_back({{"name", u.name},
                         {"valve", {{"host", u.valve.host}, {"port", u.valve.port}}},
                         {"arm", {{"host", u.arm.host}, {"port", u.arm.port}}}});

    json fingers = json::object();
    for (std::size_t i = 0; i < hand::kFingerCount; ++i) {
        const auto& f = c.hand.fingers[i];
        fingers[std::string(hand::finger_name(static_cast<hand::Finger>(i)))] = {
            {"proximal_mm", f.proximal_length}, {"distal_mm", f.distal_length}, {"root", teleop::pose_to_json(f.root)}};
    }
    json channels = json::object();
    json limits = json::object();
    json calibration = json::object();
    for (hand::DofId id : hand::all_dofs()) {
        const std::string name(hand::dof_name(id));
        channels[name] = c.hand.channel(id);
        limits[name] = c.hand.limit(id);
        calibration[name] = {{"slope", c.hand.curve(id).slope}, {"max_pressure_mbar", c.hand.curve(id).max_pressure}};
    }

    return {
        {"command_rate_hz", c.command_rate_hz},
        {"units", units},
        {"hand", {{"fingers", fingers}, {"channels", channels}, {"joint_limits_deg", limits}, {"calibration", calibration}}},
        {"valve", {{"tau_s", c.valve_tau_s}, {"tick_hz", c.valve_tick_hz}}},
        {"arm",
         {{"v_max_mm_s", c.arm_limits.v_max},
          {"w_max_deg_s", c.arm_limits.w_max},
          {"workspace_min_mm", vec3(c.arm_limits.workspace.min)},
          {"workspace_max_mm", vec3(c.arm_limits.workspace.max)},
          {"home", teleop::pose_to_json(c.arm_home)},
          {"tick_hz", c.arm_tick_hz}}},
        {"teleop", {{"smoothing_alpha", c.smoothing_alpha ? json(*c.smoothing_alpha) : json(nullptr)}}},
        {"ui", {{"port", c.ui_port}, {"broadcast_hz", c.ui_broadcast_hz}}},
    };
}

StackConfig load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    return from_json(j);
}

void save(const StackConfig& config, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write config file " + path.string());
    out << to_json(config).dump(2) << '\n';
}

std::optional<std::filesystem::path> resolve_path(const std::optional<std::string>& flag) {
    if (flag && !flag->empty()) return std::filesystem::path(*flag);
    if (const char* env = std::getenv(kConfigEnvVar); env && *env) return std::filesystem::path(env);
    return std::nullopt;
}

StackConfig load_or_default(const std::optional<std::string>& flag) {
    if (auto path = resolve_path(flag)) return load(*path);
    StackConfig c;
    c.validate();
    return c;
}

}  // namespace softhand::config
