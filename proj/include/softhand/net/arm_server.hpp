#pragma once

#include <cstdint>

#include "softhand/arm.hpp"
#include "softhand/net/server.hpp"

namespace softhand::net {

inline constexpr std::uint16_t kDefaultArmPort = 6001;

struct ArmServerOptions {
    Endpoint bind{"127.0.0.1", kDefaultArmPort};
    Pose home = arm::default_home();
    arm::ArmLimits limits;
    double tick_hz = 100.0;  // 0: motion only through advance()
};

// Line-protocol front end for a simulated arm.
class ArmServer final : public TcpServer {
  public:
    explicit ArmServer(const ArmServerOptions& options);
    ~ArmServer() override;

    void advance(double dt);
    arm::ArmState state();

  private:
    class Session;
    void on_accept(boost::asio::ip::tcp::socket socket) override;
    void on_tick(double dt) override { follower_.step(dt); }

    arm::ArmFollower follower_;
};

}  // namespace softhand::net
