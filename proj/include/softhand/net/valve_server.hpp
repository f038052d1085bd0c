#pragma once

#include <array>
#include <cstdint>

#include "softhand/net/server.hpp"
#include "softhand/valve.hpp"

namespace softhand::net {

inline constexpr std::uint16_t kDefaultValvePort = 1502;

struct ValveServerOptions {
    Endpoint bind{"127.0.0.1", kDefaultValvePort};
    double tau = valve::kDefaultTau;
    double tick_hz = valve::kDefaultTickHz;  // 0: dynamics only move through advance()
};

// Modbus/TCP front end for a simulated valve terminal. The unit id in the
// MBAP header is not checked.
class ValveServer final : public TcpServer {
  public:
    explicit ValveServer(const ValveServerOptions& options);
    ~ValveServer() override;

    void advance(double dt);
    valve::ValveDynamics dynamics();
    std::array<std::uint16_t, valve::kChannels> holding();

  private:
    class Session;
    void on_accept(boost::asio::ip::tcp::socket socket) override;
    void on_tick(double dt) override { terminal_.step(dt); }

    valve::ValveTerminal terminal_;
};

}  // namespace softhand::net
