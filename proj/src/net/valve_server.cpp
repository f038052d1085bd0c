#include "softhand/net/valve_server.hpp"

#include <memory>
#include <vector>

namespace softhand::net {

namespace asio = boost::asio;
using asio::ip::tcp;

class ValveServer::Session : public std::enable_shared_from_this<Session> {
  public:
    Session(tcp::socket socket, valve::ValveTerminal& terminal)
        : socket_(std::move(socket)), terminal_(terminal) {}

    void start() { read_header(); }

  private:
    void read_header() {
        asio::async_read(socket_, asio::buffer(header_),
                         [self = shared_from_this()](boost::system::error_code ec, std::size_t) {
                             if (!ec) self->on_header();
                         });
    }

    void on_header() {
        const modbus::MbapHeader h = modbus::decode_mbap(header_);
        // Not a Modbus peer, or a length no PDU can have: drop the connection.
        if (h.protocol != 0 || h.length < 2 || h.length > modbus::kMaxPduSize + 1) return;
        request_ = h;
        pdu_.resize(h.length - 1u);
        asio::async_read(socket_, asio::buffer(pdu_),
                         [self = shared_from_this()](boost::system::error_code ec, std::size_t) {
                             if (!ec) self->on_pdu();
                         });
    }

    void on_pdu() {
        response_ = modbus::encode_adu(request_, modbus::handle_request(pdu_, terminal_));
        asio::async_write(socket_, asio::buffer(response_),
                          [self = shared_from_this()](boost::system::error_code ec, std::size_t) {
                              if (!ec) self->read_header();
                          });
    }

    tcp::socket socket_;
    valve::ValveTerminal& terminal_;
    std::array<std::uint8_t, modbus::kMbapSize> header_{};
    modbus::MbapHeader request_;
    std::vector<std::uint8_t> pdu_;
    std::vector<std::uint8_t> response_;
};

ValveServer::ValveServer(const ValveServerOptions& options)
    : TcpServer(options.bind, options.tick_hz), terminal_(options.tau) {
    start();
}

ValveServer::~ValveServer() { stop(); }

void ValveServer::on_accept(tcp::socket socket) {
    std::make_shared<Session>(std::move(socket), terminal_)->start();
}

void ValveServer::advance(double dt) {
    run_on_owner([this, dt] { terminal_.step(dt); });
}

valve::ValveDynamics ValveServer::dynamics() {
    return run_on_owner([this] { return terminal_.dynamics(); });
}

std::array<std::uint16_t, valve::kChannels> ValveServer::holding() {
    return run_on_owner([this] {
        std::array<std::uint16_t, valve::kChannels> out{};
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = terminal_.read_holding(i);
        return out;
    });
}

}  // namespace softhand::net
