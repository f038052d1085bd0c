#include "softhand/net/arm_server.hpp"

#include <array>
#include <memory>
#include <string>

namespace softhand::net {

namespace asio = boost::asio;
using asio::ip::tcp;

namespace {
constexpr std::size_t kMaxLine = 4096;
}

class ArmServer::Session : public std::enable_shared_from_this<Session> {
  public:
    Session(tcp::socket socket, arm::ArmFollower& follower)
        : socket_(std::move(socket)), follower_(follower), buffer_(kMaxLine) {}

    void start() { read_line(); }

  private:
    void read_line() {
        asio::async_read_until(socket_, buffer_, '\n',
                               [self = shared_from_this()](boost::system::error_code ec, std::size_t n) {
                                   if (ec == asio::error::not_found) {
                                       // Overlong line: answer once, then hang up.
                                       self->reply_and_close();
                                       return;
                                   }
                                   if (!ec) self->on_line(n);
                               });
    }

    void on_line(std::size_t n) {
        std::string line(asio::buffers_begin(buffer_.data()), asio::buffers_begin(buffer_.data()) + n - 1);
        buffer_.consume(n);
        reply_ = follower_.handle(line) + "\n";
        asio::async_write(socket_, asio::buffer(reply_),
                          [self = shared_from_this()](boost::system::error_code ec, std::size_t) {
                              if (!ec) self->read_line();
                          });
    }

    void reply_and_close() {
        reply_ = std::string(arm::protocol::kErrParse) + "\n";
        asio::async_write(socket_, asio::buffer(reply_),
                          [self = shared_from_this()](boost::system::error_code, std::size_t) {
                              boost::system::error_code ignored;
                              self->socket_.shutdown(tcp::socket::shutdown_send, ignored);
                              self->drain();
                          });
    }

    // Discard the rest of the input so closing does not reset the connection
    // before the peer has read the reply.
    void drain() {
        buffer_.consume(buffer_.size());
        socket_.async_read_some(asio::buffer(sink_), [self = shared_from_this()](boost::system::error_code ec, std::size_t) {
            if (!ec) self->drain();
        });
    }

    tcp::socket socket_;
    arm::ArmFollower& follower_;
    asio::streambuf buffer_;
    std::string reply_;
    std::array<char, 1024> sink_{};
};

ArmServer::ArmServer(const ArmServerOptions& options)
    : TcpServer(options.bind, options.tick_hz), follower_(options.home, options.limits) {
    start();
}

ArmServer::~ArmServer() { stop(); }

void ArmServer::on_accept(tcp::socket socket) {
    std::make_shared<Session>(std::move(socket), follower_)->start();
}

void ArmServer::advance(double dt) {
    run_on_owner([this, dt] { follower_.step(dt); });
}

arm::ArmState ArmServer::state() {
    return run_on_owner([this] { return follower_.state(); });
}

}  // namespace softhand::net
