#include "softhand/net/server.hpp"

#include "softhand/error.hpp"

namespace softhand::net {

namespace asio = boost::asio;
using asio::ip::tcp;

TcpServer::TcpServer(const Endpoint& bind, double tick_hz) : acceptor_(io_), timer_(io_), host_(bind.host) {
    boost::system::error_code ec;
    const auto address = asio::ip::make_address(bind.host, ec);
    if (ec) throw TransportError("invalid bind address '" + bind.host + "': " + ec.message());
    const tcp::endpoint ep(address, bind.port);
    acceptor_.open(ep.protocol(), ec);
    if (!ec) acceptor_.set_option(tcp::acceptor::reuse_address(true), ec);
    if (!ec) acceptor_.bind(ep, ec);
    if (!ec) acceptor_.listen(asio::socket_base::max_listen_connections, ec);
    if (ec) throw TransportError("cannot listen on " + bind.str() + ": " + ec.message());
    port_ = acceptor_.local_endpoint().port();
    if (tick_hz > 0.0)
        tick_period_ = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
            std::chrono::duration<double>(1.0 / tick_hz));
}

TcpServer::~TcpServer() { stop(); }

void TcpServer::start() {
    accept_next();
    if (tick_period_.count() > 0) {
        last_tick_ = std::chrono::steady_clock::now();
        next_tick_ = last_tick_ + tick_period_;
        schedule_tick();
    }
    thread_ = std::thread([this] { io_.run(); });
}

void TcpServer::stop() {
    if (stopped_) return;
    stopped_ = true;
    io_.stop();
    if (thread_.joinable()) thread_.join();
    boost::system::error_code ec;
    acceptor_.close(ec);
}

void TcpServer::accept_next() {
    acceptor_.async_accept([this](boost::system::error_code ec, tcp::socket socket) {
        if (ec == asio::error::operation_aborted) return;
        if (!ec) {
            socket.set_option(tcp::no_delay(true), ec);
            on_accept(std::move(socket));
        }
        accept_next();
    });
}

void TcpServer::schedule_tick() {
    timer_.expires_at(next_tick_);
    timer_.async_wait([this](boost::system::error_code ec) {
        if (ec) return;
        const auto now = std::chrono::steady_clock::now();
        const double dt = std::chrono::duration<double>(now - last_tick_).count();
        last_tick_ = now;
        if (dt > 0.0) on_tick(dt);
        next_tick_ += tick_period_;
        if (next_tick_ < now) next_tick_ = now + tick_period_;
        schedule_tick();
    });
}

}  // namespace softhand::net
