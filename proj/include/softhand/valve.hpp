#pragma once

// Simulated 16-channel proportional valve terminal: holding registers carry
// the commanded pressure per channel (mbar), each channel tracks it with a
// first-order lag.

#include <array>
#include <cstddef>
#include <cstdint>

#include "softhand/modbus.hpp"

namespace softhand::valve {

inline constexpr std::size_t kChannels = 16;
inline constexpr std::uint16_t kMaxRegisterValue = 2500;  // 250 kPa
inline constexpr double kDefaultTau = 0.075;               // s
inline constexpr double kDefaultTickHz = 100.0;

struct ValveChannel {
    double commanded = 0.0;
    double actual = 0.0;
    double tau = kDefaultTau;
};

struct ValveDynamics {
    std::array<ValveChannel, kChannels> channels{};

    static ValveDynamics with_tau(double tau);
};

// Exact exponential update toward the commanded value, stable for any dt > 0.
// Throws InputError for dt <= 0 or tau <= 0.
ValveDynamics step_dynamics(const ValveDynamics& state, double dt);

constexpr std::uint16_t clamp_register(std::uint16_t value) {
    return value > kMaxRegisterValue ? kMaxRegisterValue : value;
}

// The register image plus dynamics. Not thread safe: the server gives one
// thread exclusive ownership.
class ValveTerminal final : public modbus::RegisterAccess {
  public:
    explicit ValveTerminal(double tau = kDefaultTau);

    std::size_t holding_count() const override { return kChannels; }
    std::size_t input_count() const override { return kChannels; }
    std::uint16_t read_holding(std::size_t address) const override;
    void write_holding(std::size_t address, std::uint16_t value) override;
    std::uint16_t read_input(std::size_t address) const override;

    void step(double dt) { dynamics_ = step_dynamics(dynamics_, dt); }
    const ValveDynamics& dynamics() const { return dynamics_; }

  private:
    std::array<std::uint16_t, kChannels> holding_{};
    ValveDynamics dynamics_;
};

}  // namespace softhand::valve
