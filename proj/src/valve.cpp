#include "softhand/valve.hpp"

#include <cmath>

#include "softhand/error.hpp"

namespace softhand::valve {

ValveDynamics ValveDynamics::with_tau(double tau) {
    ValveDynamics d;
    for (auto& ch : d.channels) ch.tau = tau;
    return d;
}

ValveDynamics step_dynamics(const ValveDynamics& state, double dt) {
    if (!(dt > 0.0)) throw InputError("dynamics step dt must be > 0");
    ValveDynamics next = state;
    for (auto& ch : next.channels) {
        if (!(ch.tau > 0.0)) throw InputError("valve time constant must be > 0");
        ch.actual += (ch.commanded - ch.actual) * -std::expm1(-dt / ch.tau);
    }
    return next;
}

ValveTerminal::ValveTerminal(double tau) : dynamics_(ValveDynamics::with_tau(tau)) {
    if (!(tau > 0.0)) throw InputError("valve time constant must be > 0");
}

std::uint16_t ValveTerminal::read_holding(std::size_t address) const { return holding_.at(address); }

void ValveTerminal::write_holding(std::size_t address, std::uint16_t value) {
    const std::uint16_t clamped = clamp_register(value);
    holding_.at(address) = clamped;
    dynamics_.channels[address].commanded = clamped;
}

std::uint16_t ValveTerminal::read_input(std::size_t address) const {
    return static_cast<std::uint16_t>(std::lround(dynamics_.channels.at(address).actual));
}

}  // namespace softhand::valve
