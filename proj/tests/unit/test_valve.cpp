#include <doctest.h>

#include <cmath>
#include <random>

#include "softhand/error.hpp"
#include "softhand/net/clients.hpp"
#include "softhand/net/tcp_stream.hpp"
#include "softhand/net/valve_server.hpp"
#include "softhand/valve.hpp"

using namespace softhand;
using namespace softhand::valve;

namespace {

ValveDynamics commanded(double value, double tau = kDefaultTau) {
    auto d = ValveDynamics::with_tau(tau);
    for (auto& ch : d.channels) ch.commanded = value;
    return d;
}

net::ValveServer manual_server() {
    return net::ValveServer({{"127.0.0.1", 0}, kDefaultTau, 0.0});
}

}  // namespace

TEST_CASE("step response matches the closed form") {
    for (double t : {0.001, 0.01, 0.075, 0.3, 1.0}) {
        const auto d = step_dynamics(commanded(400.0), t);
        CHECK(std::abs(d.channels[0].actual - 400.0 * (1.0 - std::exp(-t / kDefaultTau))) <= 1e-9);
    }
    // 400 (1 - e^-1)
    CHECK(std::abs(step_dynamics(commanded(400.0), 0.075).channels[0].actual - 252.848) <= 1e-3);
}

TEST_CASE("many small steps compose to one large step") {
    auto fine = commanded(1000.0);
    for (int i = 0; i < 100; ++i) fine = step_dynamics(fine, 0.01);
    const auto coarse = step_dynamics(commanded(1000.0), 1.0);
    CHECK(std::abs(fine.channels[5].actual - coarse.channels[5].actual) <= 1e-9);
}

TEST_CASE("command to zero decays below 2 percent in 0.3 s") {
    auto d = commanded(400.0);
    for (auto& ch : d.channels) ch.actual = 400.0;
    for (auto& ch : d.channels) ch.commanded = 0.0;
    for (int i = 0; i < 30; ++i) d = step_dynamics(d, 0.01);
    // 400 e^-4 = 7.33
    CHECK(d.channels[0].actual < 0.02 * 400.0);
    CHECK(std::abs(d.channels[0].actual - 7.326) <= 1e-3);
}

TEST_CASE("no overshoot and monotone approach") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> target(0.0, 2500.0);
    std::uniform_real_distribution<double> dt(1e-4, 0.5);
    auto d = ValveDynamics::with_tau(kDefaultTau);
    for (int i = 0; i < 500; ++i) {
        if (i % 10 == 0)
            for (auto& ch : d.channels) ch.commanded = target(rng);
        const auto next = step_dynamics(d, dt(rng));
        for (std::size_t c = 0; c < kChannels; ++c) {
            const double before = std::abs(d.channels[c].commanded - d.channels[c].actual);
            const double after = std::abs(next.channels[c].commanded - next.channels[c].actual);
            CHECK(after <= before);
            const double lo = std::min(d.channels[c].actual, d.channels[c].commanded);
            const double hi = std::max(d.channels[c].actual, d.channels[c].commanded);
            CHECK(next.channels[c].actual >= lo);
            CHECK(next.channels[c].actual <= hi);
        }
        d = next;
    }
}

TEST_CASE("invalid step arguments") {
    CHECK_THROWS_AS(step_dynamics(commanded(1.0), 0.0), InputError);
    CHECK_THROWS_AS(step_dynamics(commanded(1.0, 0.0), 0.01), InputError);
}

TEST_CASE("server: randomized register traffic is bit-exact") {
    auto server = manual_server();
    net::ValveClient client(server.endpoint());
    std::array<std::uint16_t, kChannels> model{};
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> op(0, 3);
    std::uniform_int_distribution<int> value(0, 65535);
    std::uniform_int_distribution<int> addr(0, 15);
    for (int i = 0; i < 1000; ++i) {
        switch (op(rng)) {
            case 0: {
                const auto a = static_cast<std::uint16_t>(addr(rng));
                const auto v = static_cast<std::uint16_t>(value(rng));
                client.write_single(a, v);
                model[a] = std::min<std::uint16_t>(v, 2500);
                break;
            }
            case 1: {
                const int start = addr(rng);
                const int n = std::uniform_int_distribution<int>(1, 16 - start)(rng);
                std::vector<std::uint16_t> vals(n);
                for (auto& v : vals) v = static_cast<std::uint16_t>(value(rng));
                client.write_multiple(static_cast<std::uint16_t>(start), vals);
                for (int k = 0; k < n; ++k) model[start + k] = std::min<std::uint16_t>(vals[k], 2500);
                break;
            }
            default: {
                const int start = addr(rng);
                const int n = std::uniform_int_distribution<int>(1, 16 - start)(rng);
                const auto got = client.read_holding(static_cast<std::uint16_t>(start), static_cast<std::uint16_t>(n));
                REQUIRE(got.size() == static_cast<std::size_t>(n));
                for (int k = 0; k < n; ++k) CHECK(got[k] == model[start + k]);
            }
        }
    }
    CHECK(server.holding() == model);
}

TEST_CASE("server: exceptions over the wire") {
    auto server = manual_server();
    net::ValveClient client(server.endpoint());
    try {
        client.read_holding(10, 10);
        FAIL("expected ProtocolError");
    } catch (const ProtocolError& e) {
        CHECK(e.code() == 0x02);
    }
    CHECK(client.transact(std::vector<std::uint8_t>{0x01, 0x00, 0x00, 0x00, 0x01}) ==
          std::vector<std::uint8_t>{0x81, 0x01});
    CHECK(client.transact(std::vector<std::uint8_t>{0x03, 0x00, 0x00}) == std::vector<std::uint8_t>{0x83, 0x03});
    // The connection stays usable.
    CHECK(client.read_holding(0, 1).size() == 1);
}

TEST_CASE("server: echoes transaction id and drops non-modbus protocol ids") {
    auto server = manual_server();
    auto stream = net::TcpStream::connect("127.0.0.1", server.port(), std::chrono::milliseconds(1000));
    const auto req = modbus::read_request(modbus::Function::read_holding, 0, 2);
    stream.write_all(modbus::encode_adu({0xBEEF, 0, 0, 1}, req));
    std::array<std::uint8_t, modbus::kMbapSize> head{};
    stream.read_exact(head);
    const auto h = modbus::decode_mbap(head);
    CHECK(h.transaction == 0xBEEF);
    CHECK(h.length == 1 + 2 + 4);
    std::vector<std::uint8_t> body(h.length - 1);
    stream.read_exact(body);

    stream.write_all(modbus::encode_adu({1, 7, 0, 1}, req));
    CHECK_THROWS_AS(stream.read_exact(head), TransportError);
}

TEST_CASE("server: pressures settle with dynamics") {
    auto server = manual_server();
    net::ValveClient client(server.endpoint());
    hand::PressureVector p;
    p[1] = 400.0;
    p[7] = 3000.0;
    client.write_pressures(p);
    server.advance(1.0);
    const auto actual = client.read_actual();
    CHECK(actual[1] == 400.0);
    CHECK(actual[7] == 2500.0);
    CHECK(actual[0] == 0.0);
}

TEST_CASE("client reports a refused connection as a transport error") {
    std::uint16_t port;
    {
        auto server = manual_server();
        port = server.port();
    }
    net::ValveClient client({"127.0.0.1", port}, std::chrono::milliseconds(200));
    CHECK_THROWS_AS(client.read_actual(), TransportError);
}

TEST_CASE("client rounds pressures to whole millibars") {
    auto server = manual_server();
    net::ValveClient client(server.endpoint());
    hand::PressureVector p;
    p[1] = 330.9;
    p[2] = 330.4;
    client.write_pressures(p);
    const auto regs = server.holding();
    CHECK(regs[1] == 331);
    CHECK(regs[2] == 330);
    CHECK(client.read_actual()[0] == 0.0);
}
