#pragma once

// Blocking clients for the valve terminal (Modbus/TCP) and the arm (line
// protocol). One writer at a time: share an instance across threads only
// behind external locking.

#include <array>
#include <chrono>
#include <cstdint>
#include <span>
#include <vector>

#include "softhand/net/server.hpp"
#include "softhand/net/tcp_stream.hpp"
#include "softhand/session.hpp"
#include "softhand/valve.hpp"

namespace softhand::net {

// A transport failure closes the connection; the next call reconnects.
class ValveClient final : public teleop::PressureSink {
  public:
    explicit ValveClient(Endpoint endpoint, std::chrono::milliseconds timeout = std::chrono::milliseconds(1000));

    // Connects now instead of on first use; throws TransportError.
    void connect() { ensure_connected(); }

    // One write-multiple covering registers 0..15, values rounded to whole mbar.
    void write_pressures(const hand::PressureVector& pressures) override;
    // One read of input registers 0..15.
    std::array<double, valve::kChannels> read_actual();

    std::vector<std::uint16_t> read_holding(std::uint16_t start, std::uint16_t quantity);
    std::vector<std::uint16_t> read_input(std::uint16_t start, std::uint16_t quantity);
    void write_single(std::uint16_t address, std::uint16_t value);
    void write_multiple(std::uint16_t start, std::span<const std::uint16_t> values);

    // Sends one request PDU and returns the response PDU unchecked.
    std::vector<std::uint8_t> transact(std::span<const std::uint8_t> pdu);

    const Endpoint& endpoint() const { return endpoint_; }

  private:
    void ensure_connected();

    Endpoint endpoint_;
    std::chrono::milliseconds timeout_;
    TcpStream stream_;
    std::uint16_t transaction_ = 0;
};

class ArmClient final : public teleop::PoseSink {
  public:
    explicit ArmClient(Endpoint endpoint, std::chrono::milliseconds timeout = std::chrono::milliseconds(1000));

    void connect();

    // `ERR workspace` maps to rejected_workspace; any other ERR throws ProtocolError.
    teleop::MoveResult move(const Pose& target) override;
    Pose current();
    Pose target();
    void home();

    // Sends a raw line and returns the reply line.
    std::string request(const std::string& line);

    const Endpoint& endpoint() const { return endpoint_; }

  private:
    Pose query(const char* verb);

    Endpoint endpoint_;
    std::chrono::milliseconds timeout_;
    TcpStream stream_;
};

}  // namespace softhand::net
