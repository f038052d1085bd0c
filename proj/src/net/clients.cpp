#include "softhand/net/clients.hpp"

#include <algorithm>
#include <cmath>

#include "softhand/arm.hpp"
#include "softhand/error.hpp"
#include "softhand/modbus.hpp"

namespace softhand::net {

namespace {

[[noreturn]] void rethrow_transport(const Endpoint& ep, const char* what_service, const TransportError& e) {
    throw TransportError(std::string(what_service) + " at " + ep.str() + ": " + e.what() +
                         "; check that the simulator is running (softhand sim); the next call reconnects");
}

}  // namespace

ValveClient::ValveClient(Endpoint endpoint, std::chrono::milliseconds timeout)
    : endpoint_(std::move(endpoint)), timeout_(timeout) {}

void ValveClient::ensure_connected() {
    if (stream_.is_open()) return;
    try {
        stream_ = TcpStream::connect(endpoint_.host, endpoint_.port, timeout_);
    } catch (const TransportError& e) {
        rethrow_transport(endpoint_, "valve terminal", e);
    }
}

std::vector<std::uint8_t> ValveClient::transact(std::span<const std::uint8_t> pdu) {
    ensure_connected();
    const modbus::MbapHeader header{++transaction_, 0, 0, 1};
    const auto adu = modbus::encode_adu(header, pdu);
    try {
        stream_.write_all(adu);
        std::array<std::uint8_t, modbus::kMbapSize> raw{};
        stream_.read_exact(raw);
        const modbus::MbapHeader reply = modbus::decode_mbap(raw);
        if (reply.protocol != 0 || reply.length < 2)
            throw TransportError("malformed MBAP header in response");
        std::vector<std::uint8_t> response(reply.length - 1u);
        stream_.read_exact(response);
        if (reply.transaction != header.transaction)
            throw TransportError("response transaction id does not match request");
        return response;
    } catch (const TransportError& e) {
        stream_.close();
        rethrow_transport(endpoint_, "valve terminal", e);
    }
}

std::vector<std::uint16_t> ValveClient::read_holding(std::uint16_t start, std::uint16_t quantity) {
    const auto request = modbus::read_request(modbus::Function::read_holding, start, quantity);
    return modbus::decode_read_response(modbus::Function::read_holding, quantity, transact(request));
}

std::vector<std::uint16_t> ValveClient::read_input(std::uint16_t start, std::uint16_t quantity) {
    const auto request = modbus::read_request(modbus::Function::read_input, start, quantity);
    return modbus::decode_read_response(modbus::Function::read_input, quantity, transact(request));
}

void ValveClient::write_single(std::uint16_t address, std::uint16_t value) {
    const auto request = modbus::write_single_request(address, value);
    modbus::decode_write_response(request, transact(request));
}

void ValveClient::write_multiple(std::uint16_t start, std::span<const std::uint16_t> values) {
    const auto request = modbus::write_multiple_request(start, values);
    modbus::decode_write_response(request, transact(request));
}

void ValveClient::write_pressures(const hand::PressureVector& pressures) {
    std::array<std::uint16_t, valve::kChannels> values{};
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double p = std::isfinite(pressures[i]) ? std::clamp(pressures[i], 0.0, 65535.0) : 0.0;
        values[i] = static_cast<std::uint16_t>(std::lround(p));
    }
    write_multiple(0, values);
}

std::array<double, valve::kChannels> ValveClient::read_actual() {
    const auto values = read_input(0, valve::kChannels);
    std::array<double, valve::kChannels> out{};
    std::copy(values.begin(), values.end(), out.begin());
    return out;
}

ArmClient::ArmClient(Endpoint endpoint, std::chrono::milliseconds timeout)
    : endpoint_(std::move(endpoint)), timeout_(timeout) {}

void ArmClient::connect() {
    if (stream_.is_open()) return;
    try {
        stream_ = TcpStream::connect(endpoint_.host, endpoint_.port, timeout_);
    } catch (const TransportError& e) {
        rethrow_transport(endpoint_, "arm", e);
    }
}

std::string ArmClient::request(const std::string& line) {
    connect();
    try {
        stream_.write_all(line + "\n");
        return stream_.read_line();
    } catch (const TransportError& e) {
        stream_.close();
        rethrow_transport(endpoint_, "arm", e);
    }
}

teleop::MoveResult ArmClient::move(const Pose& target) {
    const std::string reply = request(arm::protocol::format(arm::protocol::Move{target}));
    if (reply == arm::protocol::kOk) return teleop::MoveResult::accepted;
    if (reply == arm::protocol::kErrWorkspace) return teleop::MoveResult::rejected_workspace;
    throw ProtocolError("arm at " + endpoint_.str() + " replied '" + reply + "' to MOVE");
}

Pose ArmClient::query(const char* verb) {
    const std::string reply = request(verb);
    constexpr std::string_view prefix = "STATE ";
    if (reply.rfind(prefix, 0) != 0)
        throw ProtocolError("arm at " + endpoint_.str() + " replied '" + reply + "' to " + verb);
    try {
        return parse_pose(reply.substr(prefix.size()));
    } catch (const InputError& e) {
        throw ProtocolError("arm STATE reply unparseable: " + std::string(e.what()));
    }
}

Pose ArmClient::current() { return query("GET"); }
Pose ArmClient::target() { return query("TARGET"); }

void ArmClient::home() {
    const std::string reply = request("HOME");
    if (reply != arm::protocol::kOk) throw ProtocolError("arm replied '" + reply + "' to HOME");
}

}  // namespace softhand::net
