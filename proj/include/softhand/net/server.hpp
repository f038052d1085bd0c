#pragma once

// Single-threaded TCP server scaffold. Accepting, every connection handler
// and the periodic tick run on one io_context thread, so whatever state a
// subclass owns is touched by that thread only.

#include <chrono>
#include <cstdint>
#include <functional>
#include <future>
#include <memory>
#include <string>
#include <stdexcept>
#include <thread>

#include <boost/asio.hpp>

#include "softhand/endpoint.hpp"

namespace softhand::net {

using softhand::Endpoint;

class TcpServer {
  public:
    TcpServer(const TcpServer&) = delete;
    TcpServer& operator=(const TcpServer&) = delete;
    // Subclass destructors must call stop() before their state goes away.
    virtual ~TcpServer();

    std::uint16_t port() const { return port_; }
    Endpoint endpoint() const { return {host_, port_}; }
    void stop();

    // Runs `fn` on the owner thread and waits for its result.
    template <class Fn>
    auto run_on_owner(Fn fn) -> decltype(fn()) {
        using R = decltype(fn());
        if (stopped_) throw std::logic_error("server stopped");
        std::packaged_task<R()> task(std::move(fn));
        auto result = task.get_future();
        boost::asio::post(io_, [&task] { task(); });
        return result.get();
    }

  protected:
    // Binds immediately; throws TransportError when the address is unavailable.
    // tick_hz == 0 disables the periodic tick (time advanced by the caller).
    TcpServer(const Endpoint& bind, double tick_hz);

    // Must be called at the end of the subclass constructor.
    void start();

    virtual void on_accept(boost::asio::ip::tcp::socket socket) = 0;
    virtual void on_tick(double dt) = 0;

    boost::asio::io_context& io() { return io_; }

  private:
    void accept_next();
    void schedule_tick();

    boost::asio::io_context io_;
    boost::asio::ip::tcp::acceptor acceptor_;
    boost::asio::steady_timer timer_;
    std::chrono::steady_clock::duration tick_period_{};
    std::chrono::steady_clock::time_point last_tick_{};
    std::chrono::steady_clock::time_point next_tick_{};
    std::string host_;
    std::uint16_t port_ = 0;
    std::thread thread_;
    bool stopped_ = false;
};

}  // namespace softhand::net
