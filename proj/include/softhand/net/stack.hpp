#pragma once

// Composition helpers used by the CLI: simulator bring-up, replay sessions
// against configured endpoints, and the over-the-wire fatigue port.

#include <memory>
#include <vector>

#include "softhand/config.hpp"
#include "softhand/fatigue.hpp"
#include "softhand/net/arm_server.hpp"
#include "softhand/net/clients.hpp"
#include "softhand/net/valve_server.hpp"
#include "softhand/session.hpp"

namespace softhand::net {

// One valve server and one arm server per configured unit.
struct Simulators {
    std::vector<std::unique_ptr<ValveServer>> valves;
    std::vector<std::unique_ptr<ArmServer>> arms;

    void stop();
};

// Throws TransportError when any endpoint cannot be bound.
Simulators start_simulators(const config::StackConfig& config);

enum class AlignMode {
    identity,     // tracker frame == robot frame
    first_frame,  // first frame's wrist <-> arm pose at session start
};

struct ReplayOptions {
    double rate_hz = 10.0;
    AlignMode align = AlignMode::first_frame;
    const std::atomic<bool>* stop = nullptr;
};

teleop::SessionReport replay(const config::StackConfig& config, const config::UnitConfig& unit,
                             std::vector<teleop::TrackedFrame> frames, const ReplayOptions& options);

class RemoteValvePort final : public fatigue::ValvePort {
  public:
    explicit RemoteValvePort(Endpoint endpoint) : client_(std::move(endpoint)) {}
    void command(int channel, double mbar) override;
    double actual(int channel) override;
    void wait(double dt) override;

  private:
    ValveClient client_;
};

}  // namespace softhand::net
