#pragma once

// WebSocket endpoint `/ws` for the operator console. Broadcasts one state
// message per broadcast period and turns UI commands into frames for the
// teleoperation mailbox. Message schema: docs/protocols.md.

#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <thread>

#include <boost/asio.hpp>
#include <nlohmann/json.hpp>

#include "softhand/config.hpp"
#include "softhand/net/server.hpp"
#include "softhand/session.hpp"

namespace softhand::net {

struct UiServerOptions {
    Endpoint bind{"127.0.0.1", 8080};
    config::StackConfig config;
    std::size_t unit = 0;
    std::filesystem::path replay_dir = ".";
};

class UiServer {
  public:
    explicit UiServer(UiServerOptions options);
    ~UiServer();
    UiServer(const UiServer&) = delete;
    UiServer& operator=(const UiServer&) = delete;

    std::uint16_t port() const { return port_; }
    void stop();

    // Applies one UI command message; returns the error reply if it was rejected.
    std::optional<std::string> handle_message(std::string_view text);

    nlohmann::json state_message();

  private:
    class Session;
    friend class Session;

    void accept_next();
    void broadcast(std::string message);
    void poll_loop();
    void teleop_loop();
    void post_frame_locked();
    void start_replay(const std::string& file);
    void stop_replay();

    UiServerOptions options_;
    const config::UnitConfig unit_;

    boost::asio::io_context io_;
    boost::asio::ip::tcp::acceptor acceptor_;
    std::uint16_t port_ = 0;
    std::set<std::shared_ptr<Session>> sessions_;  // io thread only

    std::mutex mutex_;  // guards everything below
    hand::HandState operator_hand_;
    Pose wrist_;
    teleop::FrameAlignment alignment_;
    hand::PressureVector commanded_;
    std::array<double, 16> actual_{};
    Pose arm_current_;
    Pose arm_target_;
    bool valve_connected_ = false;
    bool arm_connected_ = false;
    nlohmann::json session_stats_ = nlohmann::json::object();
    std::string last_error_;

    teleop::FrameMailbox mailbox_;
    std::atomic<bool> stopping_{false};
    std::atomic<bool> session_restart_{false};  // new alignment: restart the command loop
    std::atomic<bool> replay_stop_{false};
    std::thread replay_thread_;
    std::thread io_thread_;
    std::thread poll_thread_;
    std::thread teleop_thread_;
    bool stopped_ = false;
};

}  // namespace softhand::net
