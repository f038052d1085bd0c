// Acceptance suite: one PASS/FAIL line per primary criterion. Exit status is
// non-zero when any gating criterion fails; the loop timing line is
// informational only.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "softhand/actuator.hpp"
#include "softhand/fatigue.hpp"
#include "softhand/hand.hpp"
#include "softhand/modbus.hpp"
#include "softhand/net/arm_server.hpp"
#include "softhand/net/clients.hpp"
#include "softhand/net/stack.hpp"
#include "softhand/net/valve_server.hpp"
#include "softhand/teleop.hpp"
#include "softhand/valve.hpp"

using namespace softhand;
using SteadyClock = std::chrono::steady_clock;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

double elapsed_ms(SteadyClock::time_point since) {
    return std::chrono::duration<double, std::milli>(SteadyClock::now() - since).count();
}

std::string num(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string sci(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

Eigen::Quaterniond random_quat(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    return Eigen::Quaterniond(n(rng), n(rng), n(rng), n(rng)).normalized();
}

Pose random_pose(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-500.0, 500.0);
    return Pose::make({u(rng), u(rng), u(rng)}, random_quat(rng));
}

Eigen::Matrix4d matrix_of(const Pose& p) {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = p.orientation.toRotationMatrix();
    m.topRightCorner<3, 1>() = p.position;
    return m;
}

actuator::BellowSpec reference_bellow() {
    actuator::BellowSpec b;
    b.x = 7.5;
    b.d = 5.0;
    b.delta_d = 2.0;
    return b;
}

Outcome bend_radius_oracle() {
    Outcome o;
    const auto t0 = SteadyClock::now();
    const double r = actuator::bend_radius(reference_bellow());
    const double ms = elapsed_ms(t0);
    o.require(std::abs(r - 18.9) <= 0.05, "r = " + num(r));
    o.require(ms < 1.0, "runtime " + num(ms) + " ms");
    if (o.pass) o.detail = "r = " + num(r) + " mm, " + num(ms * 1e3, 1) + " us";
    return o;
}

Outcome bend_angle_oracle() {
    Outcome o;
    const auto t0 = SteadyClock::now();
    const double theta = actuator::bend_angle_per_chamber(reference_bellow());
    const int n = actuator::chambers_for_angle(reference_bellow(), 180.0);
    const double ms = elapsed_ms(t0);
    o.require(std::abs(theta - 15.2) <= 0.05, "theta = " + num(theta));
    o.require(n == 12, "n = " + std::to_string(n));
    o.require(ms < 1.0, "runtime " + num(ms) + " ms");
    if (o.pass) o.detail = "theta = " + num(theta) + " deg, n = 12, " + num(ms * 1e3, 1) + " us";
    return o;
}

Outcome calibration_law() {
    Outcome o;
    const actuator::CalibrationCurve curve{0.272, 500.0};
    for (int p = 0; p <= 500; p += 100)
        o.require(actuator::pressure_to_angle(curve, p) == 0.272 * p, "P = " + std::to_string(p));

    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> slopes(0.01, 2.0);
    std::uniform_real_distribution<double> pressures(0.0, 500.0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const double s = slopes(rng);
        std::vector<actuator::PressureAngleSample> samples;
        for (int k = 0; k < 20; ++k) {
            const double p = pressures(rng);
            samples.push_back({p, s * p});
        }
        worst = std::max(worst, std::abs(actuator::fit_calibration(samples).slope - s) / s);
    }
    o.require(worst <= 1e-9, "fit relative error " + sci(worst));
    if (o.pass) o.detail = "6/6 exact, worst fit relative error " + sci(worst);
    return o;
}

Outcome inverse_pairs() {
    Outcome o;
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> slopes(0.05, 1.0);
    const auto geom = hand::HandGeometry::defaults();
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const actuator::CalibrationCurve curve{slopes(rng), 500.0};
        const double p = unit(rng) * curve.max_pressure;
        const double p_back = actuator::angle_to_pressure(curve, actuator::pressure_to_angle(curve, p));
        worst = std::max(worst, std::abs(p_back - p) / std::max(p, 1.0));
        const double a = unit(rng) * curve.slope * curve.max_pressure;
        const double a_back = actuator::pressure_to_angle(curve, actuator::angle_to_pressure(curve, a));
        worst = std::max(worst, std::abs(a_back - a) / std::max(a, 1.0));

        hand::HandState s;
        for (auto id : hand::all_dofs())
            s[id] = unit(rng) * std::min(geom.limit(id), geom.curve(id).slope * geom.curve(id).max_pressure);
        const auto back = hand::pressures_to_hand(hand::hand_to_pressures(s, geom), geom);
        for (auto id : hand::all_dofs()) worst = std::max(worst, std::abs(back[id] - s[id]) / std::max(s[id], 1.0));
    }
    // Exact up to floating-point rounding of one multiply and one divide.
    o.require(worst <= 1e-14, "worst relative error " + sci(worst));
    if (o.pass) o.detail = "1000 x (angle<->pressure, pressure<->angle, hand<->pressure), worst rel " + sci(worst);
    return o;
}

Outcome kinematics_properties() {
    Outcome o;
    const double L = 45.0;
    const double drift = (hand::arc_displacement(L, 1e-6) - Eigen::Vector2d(0.0, L)).norm();
    o.require(drift < 1e-3, "phi = 1e-6 drift " + sci(drift));

    const auto geom = hand::HandGeometry::defaults();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int violations = 0;
    for (int i = 0; i < 1000; ++i) {
        hand::HandState s;
        for (auto id : hand::all_dofs()) s[id] = unit(rng) * geom.limit(id);
        const auto tips = hand::fingertip_positions(s, geom);
        for (std::size_t f = 0; f < hand::kFingerCount; ++f) {
            const auto& fg = geom.fingers[f];
            if ((tips[f] - fg.root.position).norm() > fg.proximal_length + fg.distal_length + 1e-9) ++violations;
        }
    }
    o.require(violations == 0, std::to_string(violations) + " chord > arc");

    const auto half = hand::arc_displacement(L, kPi);
    const double lateral_err = std::abs(half.x() - 2.0 * L / kPi);
    o.require(lateral_err <= 1e-9, "180 deg lateral error " + sci(lateral_err));
    if (o.pass)
        o.detail = "drift " + sci(drift) + " mm, 1000 states chord <= arc, 180 deg err " +
                   sci(lateral_err);
    return o;
}

Outcome modbus_conformance() {
    Outcome o;
    net::ValveServer server({{"127.0.0.1", 0}, valve::kDefaultTau, 0.0});
    net::ValveClient client(server.endpoint());
    std::array<std::uint16_t, valve::kChannels> model{};
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> op(0, 2);
    std::uniform_int_distribution<int> value(0, 65535);
    std::uniform_int_distribution<int> addr(0, 15);
    int mismatches = 0;
    for (int i = 0; i < 1000; ++i) {
        const int start = addr(rng);
        const int n = std::uniform_int_distribution<int>(1, 16 - start)(rng);
        switch (op(rng)) {
            case 0: {
                const auto v = static_cast<std::uint16_t>(value(rng));
                client.write_single(static_cast<std::uint16_t>(start), v);
                model[start] = std::min<std::uint16_t>(v, 2500);
                break;
            }
            case 1: {
                std::vector<std::uint16_t> vals(n);
                for (auto& v : vals) v = static_cast<std::uint16_t>(value(rng));
                client.write_multiple(static_cast<std::uint16_t>(start), vals);
                for (int k = 0; k < n; ++k) model[start + k] = std::min<std::uint16_t>(vals[k], 2500);
                break;
            }
            default: {
                const auto got = client.read_holding(static_cast<std::uint16_t>(start), static_cast<std::uint16_t>(n));
                for (int k = 0; k < n; ++k)
                    if (got[k] != model[start + k]) ++mismatches;
            }
        }
    }
    o.require(mismatches == 0, std::to_string(mismatches) + " register mismatches");

    using Bytes = std::vector<std::uint8_t>;
    struct Case {
        Bytes pdu;
        std::uint8_t code;
    };
    const std::vector<Case> malformed = {
        {{0x01, 0x00, 0x00, 0x00, 0x01}, 0x01},                    // coils: unsupported function
        {{0x03, 0x00, 0x10, 0x00, 0x01}, 0x02},                    // read holding at 16
        {{0x04, 0x00, 0x0F, 0x00, 0x02}, 0x02},                    // input read past the end
        {{0x06, 0x00, 0x10, 0x00, 0x01}, 0x02},                    // write single at 16
        {{0x03, 0x00, 0x00, 0x00, 0x00}, 0x03},                    // zero quantity
        {{0x03, 0x00, 0x00}, 0x03},                                // truncated PDU
        {{0x10, 0x00, 0x00, 0x00, 0x02, 0x02, 0x00, 0x01}, 0x03},  // byte count mismatch
    };
    for (const auto& c : malformed) {
        const auto resp = client.transact(c.pdu);
        const bool ok = resp.size() == 2 && resp[0] == (c.pdu[0] | 0x80) && resp[1] == c.code;
        o.require(ok, "wrong exception for function " + std::to_string(c.pdu[0]));
    }
    const auto holding = client.read_holding(0, 16);
    o.require(std::equal(holding.begin(), holding.end(), model.begin()), "malformed frames changed registers");
    if (o.pass) o.detail = "1000 ops bit-exact, " + std::to_string(malformed.size()) + " malformed frames answered";
    return o;
}

Outcome dynamics() {
    Outcome o;
    const double tau = valve::kDefaultTau;
    double worst = 0.0;
    for (double t : {0.001, 0.01, 0.05, 0.075, 0.2, 0.3, 1.0}) {
        auto d = valve::ValveDynamics::with_tau(tau);
        d.channels[0].commanded = 400.0;
        d = valve::step_dynamics(d, t);
        worst = std::max(worst, std::abs(d.channels[0].actual - 400.0 * (1.0 - std::exp(-t / tau))));
    }
    o.require(worst <= 1e-9, "closed-form error " + sci(worst));

    valve::ValveTerminal terminal(tau);
    terminal.write_holding(0, 400);
    for (int i = 0; i < 200; ++i) terminal.step(0.01);
    terminal.write_holding(0, 0);
    double t = 0.0;
    while (terminal.dynamics().channels[0].actual >= 0.02 * 400.0 && t < 1.0) {
        terminal.step(0.01);
        t += 0.01;
    }
    o.require(t <= 0.3 + 1e-9, "below 2% after " + num(t, 2) + " s");
    if (o.pass) o.detail = "closed-form error " + sci(worst) + ", below 2% after " + num(t, 2) + " s";
    return o;
}

Outcome teleop_calibration() {
    Outcome o;
    std::mt19937_64 rng(5);
    double worst_identity = 0.0;
    double worst_relative = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const Pose h = random_pose(rng);
        const Pose r = random_pose(rng);
        const auto a = teleop::calibrate(h, r);
        const Pose back = teleop::retarget_pose(a, h);
        worst_identity = std::max({worst_identity, (back.position - r.position).norm(),
                                   quaternion_distance(back.orientation, r.orientation)});
        const Pose h1 = random_pose(rng);
        const Pose h2 = random_pose(rng);
        const Eigen::Matrix4d lhs =
            matrix_of(teleop::retarget_pose(a, h1)).inverse() * matrix_of(teleop::retarget_pose(a, h2));
        const Eigen::Matrix4d rhs = matrix_of(h1).inverse() * matrix_of(h2);
        worst_relative = std::max(worst_relative, (lhs - rhs).cwiseAbs().maxCoeff());
    }
    o.require(worst_identity <= 1e-9, "identity error " + sci(worst_identity));
    o.require(worst_relative <= 1e-9, "relative-motion error " + sci(worst_relative));
    if (o.pass)
        o.detail = "1000 pairs, identity " + sci(worst_identity) + ", relative " +
                   sci(worst_relative);
    return o;
}

Outcome end_to_end_static() {
    Outcome o;
    const auto t0 = SteadyClock::now();
    config::StackConfig cfg;
    net::ValveServer valves({{"127.0.0.1", 0}, cfg.valve_tau_s, cfg.valve_tick_hz});
    net::ArmServer arm({{"127.0.0.1", 0}, cfg.arm_home, cfg.arm_limits, cfg.arm_tick_hz});
    cfg.units[0].valve = valves.endpoint();
    cfg.units[0].arm = arm.endpoint();

    teleop::TrackedFrame frame;
    frame.wrist = Pose::make({60.0, -40.0, 420.0},
                             Eigen::Quaterniond(Eigen::AngleAxisd(0.6, Eigen::Vector3d(1, 2, 3).normalized())));
    frame.hand = hand::preset_pose("pinch");
    frame.hand[hand::DofId::spread_3] = 12.5;
    std::vector<teleop::TrackedFrame> frames;
    for (int i = 0; i <= 20; ++i) {
        frame.t = i * 0.1;
        frames.push_back(frame);
    }
    net::ReplayOptions opts;
    opts.rate_hz = 10.0;
    opts.align = net::AlignMode::identity;
    const auto report = net::replay(cfg, cfg.units[0], frames, opts);
    o.require(!report.aborted, "session aborted: " + report.error);

    const auto expected = teleop::frame_to_commands(frame, teleop::FrameAlignment::identity(), cfg.hand);
    net::ValveClient valve_client(cfg.units[0].valve);
    const auto actual = valve_client.read_actual();
    double worst_mbar = 0.0;
    for (std::size_t ch = 0; ch < valve::kChannels; ++ch)
        worst_mbar = std::max(worst_mbar, std::abs(actual[ch] - expected.pressures[ch]));
    o.require(worst_mbar <= 1.0, "valve off by " + num(worst_mbar, 3) + " mbar");

    net::ArmClient arm_client(cfg.units[0].arm);
    const Pose current = arm_client.current();
    const double pos_err = (current.position - expected.arm_target.position).norm();
    o.require(pos_err <= 1e-3, "arm off by " + sci(pos_err) + " mm");
    const double ms = elapsed_ms(t0);
    o.require(ms < 10000.0, "runtime " + num(ms / 1e3, 2) + " s");
    if (o.pass)
        o.detail = std::to_string(report.ticks_sent) + " ticks, valve max err " + num(worst_mbar, 3) +
                   " mbar, arm err " + sci(pos_err) + " mm, " + num(ms / 1e3, 2) + " s";
    return o;
}

Outcome fatigue_schedule() {
    Outcome o;
    const auto t0 = SteadyClock::now();
    fatigue::SimulatedValvePort port(valve::kDefaultTau, 0.0);
    fatigue::FatigueOptions opts;
    opts.duration_s = fatigue::parse_duration("2h");
    opts.cpm = 20.0;
    opts.pressure = 400.0;
    const auto report = fatigue::run_fatigue(port, opts);
    const double s = elapsed_ms(t0) / 1e3;
    o.require(report.cycles_completed == 2400, std::to_string(report.cycles_completed) + " cycles");
    o.require(report.pass, "harness verdict fail");
    o.require(s < 30.0, "wall clock " + num(s, 2) + " s");
    if (o.pass)
        o.detail = "2400 cycles, min peak " + num(report.peak_min, 1) + " mbar, " + num(s, 2) + " s wall clock";
    return o;
}

Outcome loop_timing() {
    Outcome o;
    config::StackConfig cfg;
    net::ValveServer valves({{"127.0.0.1", 0}, cfg.valve_tau_s, cfg.valve_tick_hz});
    net::ArmServer arm({{"127.0.0.1", 0}, cfg.arm_home, cfg.arm_limits, cfg.arm_tick_hz});
    cfg.units[0].valve = valves.endpoint();
    cfg.units[0].arm = arm.endpoint();
    std::vector<teleop::TrackedFrame> frames;
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> wobble(-20.0, 20.0);
    for (int i = 0; i <= 300; ++i) {
        teleop::TrackedFrame f;
        f.t = i / 30.0;
        f.wrist = Pose::make({wobble(rng), wobble(rng), wobble(rng)}, Eigen::Quaterniond::Identity());
        f.hand[hand::DofId::index_mcp_flex] = 90.0 + wobble(rng);
        frames.push_back(f);
    }
    net::ReplayOptions opts;
    opts.rate_hz = 10.0;
    const auto report = net::replay(cfg, cfg.units[0], frames, opts);
    o.require(!report.aborted, "session aborted: " + report.error);
    o.require(report.jitter_ms.p99 < 20.0, "p99 jitter " + num(report.jitter_ms.p99, 3) + " ms");
    o.detail += (o.detail.empty() ? "" : "; ") + std::to_string(report.ticks_sent) + " ticks, jitter p99 " +
                num(report.jitter_ms.p99, 3) + " ms, max " + num(report.jitter_ms.max, 3) + " ms, latency p99 " +
                num(report.latency_ms.p99, 3) + " ms";
    return o;
}

struct Criterion {
    const char* name;
    std::function<Outcome()> check;
    bool gating = true;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {"bend radius oracle", bend_radius_oracle},
        {"bend angle and chamber count oracle", bend_angle_oracle},
        {"pressure/angle calibration law", calibration_law},
        {"inverse-pair property suite", inverse_pairs},
        {"fingertip kinematics properties", kinematics_properties},
        {"modbus conformance", modbus_conformance},
        {"valve dynamics", dynamics},
        {"teleop calibration identity and relative motion", teleop_calibration},
        {"end-to-end static consistency over sockets", end_to_end_static},
        {"fatigue schedule under simulated time", fatigue_schedule},
        {"loop timing at 10 Hz (informational)", loop_timing, false},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const char* tag = o.pass ? "PASS" : (c.gating ? "FAIL" : "WARN");
        std::printf("%s  %s: %s\n", tag, c.name, o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass && c.gating) ++failures;
    }
    std::printf("%d/%zu gating criteria passed\n", static_cast<int>(criteria.size()) - 1 - failures,
                criteria.size() - 1);
    return failures == 0 ? 0 : 1;
}
