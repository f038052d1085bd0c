#include "softhand/net/stack.hpp"

#include <chrono>
#include <cmath>
#include <thread>

#include "softhand/error.hpp"

namespace softhand::net {

void Simulators::stop() {
    for (auto& v : valves) v->stop();
    for (auto& a : arms) a->stop();
}

Simulators start_simulators(const config::StackConfig& config) {
    Simulators sims;
    for (const auto& unit : config.units) {
        sims.valves.push_back(std::make_unique<ValveServer>(
            ValveServerOptions{unit.valve, config.valve_tau_s, config.valve_tick_hz}));
        sims.arms.push_back(std::make_unique<ArmServer>(
            ArmServerOptions{unit.arm, config.arm_home, config.arm_limits, config.arm_tick_hz}));
    }
    return sims;
}

teleop::SessionReport replay(const config::StackConfig& config, const config::UnitConfig& unit,
                             std::vector<teleop::TrackedFrame> frames, const ReplayOptions& options) {
    ValveClient valves(unit.valve);
    ArmClient arm(unit.arm);
    valves.connect();
    arm.connect();

    teleop::FrameAlignment alignment;
    if (options.align == AlignMode::first_frame && !frames.empty())
        alignment = teleop::calibrate(frames.front().wrist, arm.current());

    teleop::ReplaySource source(std::move(frames));
    teleop::SessionOptions session;
    session.rate_hz = options.rate_hz;
    session.smoothing_alpha = config.smoothing_alpha;
    session.stop = options.stop;
    teleop::SteadyClock clock;
    return teleop::run_teleop(source, valves, arm, alignment, config.hand, session, clock);
}

void RemoteValvePort::command(int channel, double mbar) {
    client_.write_single(static_cast<std::uint16_t>(channel),
                         static_cast<std::uint16_t>(std::lround(std::clamp(mbar, 0.0, 65535.0))));
}

double RemoteValvePort::actual(int channel) {
    return client_.read_input(static_cast<std::uint16_t>(channel), 1).at(0);
}

void RemoteValvePort::wait(double dt) { std::this_thread::sleep_for(std::chrono::duration<double>(dt)); }

}  // namespace softhand::net
