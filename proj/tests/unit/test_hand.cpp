#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "softhand/error.hpp"
#include "softhand/hand.hpp"

using namespace softhand;
using namespace softhand::hand;

namespace {

constexpr double kPi = std::numbers::pi;

// Walks a constant-curvature arc as many short straight pieces; the
// midpoint heading rule converges quadratically.
Eigen::Vector2d walked_arc(double length, double phi, double heading, int pieces) {
    Eigen::Vector2d p = Eigen::Vector2d::Zero();
    const double piece = length / pieces;
    for (int k = 0; k < pieces; ++k) {
        const double h = heading + phi * (k + 0.5) / pieces;
        p += piece * Eigen::Vector2d(std::sin(h), std::cos(h));
    }
    return p;
}

Eigen::Vector2d walked_finger(double l1, double phi1, double l2, double phi2) {
    return walked_arc(l1, phi1, 0.0, 4000) + walked_arc(l2, phi2, phi1, 4000);
}

HandState random_state(std::mt19937_64& rng, const HandGeometry& geom) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    HandState s;
    for (DofId id : all_dofs()) s[id] = unit(rng) * geom.limit(id);
    return s;
}

}  // namespace

TEST_CASE("dof names and channels") {
    std::set<std::string> names;
    for (DofId id : all_dofs()) {
        const std::string n(dof_name(id));
        names.insert(n);
        REQUIRE(dof_from_name(n));
        CHECK(*dof_from_name(n) == id);
    }
    CHECK(names.size() == kDofCount);
    CHECK_FALSE(dof_from_name("index_tip"));

    const auto geom = HandGeometry::defaults();
    CHECK(geom.channel(DofId::index_mcp_flex) == 0);
    CHECK(geom.channel(DofId::index_dippip_flex) == 1);
    CHECK(geom.channel(DofId::thumb_cmc_oppose) == 14);
    CHECK_FALSE(geom.dof_on_channel(15));
    CHECK(geom.dof_on_channel(1) == DofId::index_dippip_flex);
    CHECK_NOTHROW(geom.validate());
}

TEST_CASE("channel map must be a bijection") {
    auto geom = HandGeometry::defaults();
    geom.channels[index_of(DofId::spread_1)] = geom.channel(DofId::index_mcp_flex);
    CHECK_THROWS_AS(geom.validate(), InputError);
}

TEST_CASE("hand to pressures uses the per-dof curve and channel") {
    const auto geom = HandGeometry::defaults();
    HandState s;
    s[DofId::index_dippip_flex] = 108.8;
    const auto p = hand_to_pressures(s, geom);
    CHECK(p[1] == doctest::Approx(400.0).epsilon(1e-12));
    for (std::size_t ch = 0; ch < kChannelCount; ++ch)
        if (ch != 1) CHECK(p[ch] == 0.0);

    s[DofId::index_dippip_flex] = 181.0;
    CHECK_THROWS_AS(hand_to_pressures(s, geom), InputError);
    s[DofId::index_dippip_flex] = -1.0;
    CHECK_THROWS_AS(hand_to_pressures(s, geom), InputError);
}

TEST_CASE("clamping into joint limits") {
    const auto geom = HandGeometry::defaults();
    HandState s;
    s[DofId::spread_2] = 45.0;
    s[DofId::ring_mcp_flex] = -3.0;
    CHECK(clamp_to_limits(s, geom) == 2);
    CHECK(s[DofId::spread_2] == 30.0);
    CHECK(s[DofId::ring_mcp_flex] == 0.0);
    CHECK(clamp_to_limits(s, geom) == 0);
}

TEST_CASE("the pressure ceiling caps flexion below the joint limit") {
    const auto geom = HandGeometry::defaults();
    HandState s;
    s[DofId::middle_mcp_flex] = 180.0;
    const auto p = hand_to_pressures(s, geom);
    CHECK(p[2] == 500.0);
    // 0.272 deg/mbar * 500 mbar
    CHECK(pressures_to_hand(p, geom)[DofId::middle_mcp_flex] == doctest::Approx(136.0));
}

TEST_CASE("pressures to hand treats negatives as zero and saturates") {
    const auto geom = HandGeometry::defaults();
    PressureVector p;
    p[0] = -20.0;
    p[8] = 2500.0;
    const auto s = pressures_to_hand(p, geom);
    CHECK(s[DofId::index_mcp_flex] == 0.0);
    CHECK(s[DofId::spread_1] == geom.limit(DofId::spread_1));
}

TEST_CASE("hand/pressure round trip over random in-range states") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto geom = HandGeometry::defaults();
    for (int i = 0; i < 1000; ++i) {
        // Below both the joint limit and the angle the pressure ceiling allows.
        HandState s;
        for (DofId id : all_dofs())
            s[id] = unit(rng) * std::min(geom.limit(id), geom.curve(id).slope * geom.curve(id).max_pressure);
        const HandState back = pressures_to_hand(hand_to_pressures(s, geom), geom);
        for (DofId id : all_dofs()) CHECK(back[id] == doctest::Approx(s[id]).epsilon(1e-14));
    }
}

TEST_CASE("arc displacement closed-form cases") {
    const double L = 45.0;
    const auto straight = arc_displacement(L, 0.0);
    CHECK(straight.x() == 0.0);
    CHECK(straight.y() == L);

    const auto tiny = arc_displacement(L, 1e-6);
    CHECK((tiny - Eigen::Vector2d(0.0, L)).norm() < 1e-3);
    CHECK(std::isfinite(tiny.x()));
    CHECK(tiny.x() > 0.0);

    for (double len : {10.0, 45.0, 90.0}) {
        const auto half_turn = arc_displacement(len, kPi);
        CHECK(std::abs(half_turn.x() - 2.0 * len / kPi) <= 1e-9);
        CHECK(std::abs(half_turn.y()) <= 1e-9);
    }
    // 180 deg over 90 mm: lateral offset 2 * 90 / pi
    CHECK(std::abs(arc_displacement(90.0, kPi).x() - 57.29578) <= 1e-5);
}

TEST_CASE("arc displacement is continuous approaching zero") {
    const double L = 45.0;
    double prev = arc_displacement(L, 1e-2).x();
    for (double phi = 1e-3; phi > 1e-12; phi /= 10.0) {
        const auto d = arc_displacement(L, phi);
        // Lateral offset ~ L phi / 2 for small phi.
        CHECK(d.x() == doctest::Approx(L * phi / 2.0).epsilon(1e-6));
        CHECK(d.x() < prev);
        prev = d.x();
    }
}

TEST_CASE("planar tip matches a walked-out arc") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> angle(0.0, kPi);
    for (int i = 0; i < 50; ++i) {
        const double a = angle(rng);
        const double b = angle(rng);
        const Eigen::Vector2d tip = planar_tip(45.0, a, 35.0, b);
        const Eigen::Vector2d oracle = walked_finger(45.0, a, 35.0, b);
        CHECK((tip - oracle).norm() < 1e-3);
    }
}

TEST_CASE("chord never exceeds the finger length") {
    std::mt19937_64 rng(8);
    const auto geom = HandGeometry::defaults();
    for (int i = 0; i < 1000; ++i) {
        const HandState s = random_state(rng, geom);
        const auto tips = fingertip_positions(s, geom);
        for (std::size_t f = 0; f < kFingerCount; ++f) {
            const auto& fg = geom.fingers[f];
            const double chord = (tips[f] - fg.root.position).norm();
            CHECK(chord <= fg.proximal_length + fg.distal_length + 1e-9);
        }
    }
}

TEST_CASE("open hand has straight fingers along palm y") {
    const auto geom = HandGeometry::defaults();
    const auto tips = fingertip_positions(preset_pose("open"), geom);
    for (Finger f : {Finger::index, Finger::middle, Finger::ring, Finger::pinky}) {
        const auto& fg = geom.finger(f);
        const Eigen::Vector3d expected = fg.root.position + Eigen::Vector3d(0, fg.proximal_length + fg.distal_length, 0);
        CHECK((tips[index_of(f)] - expected).norm() < 1e-9);
    }
}

TEST_CASE("spread leaves the tip distance from the root unchanged") {
    const auto geom = HandGeometry::defaults();
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> spread(0.0, 30.0);
    for (int i = 0; i < 100; ++i) {
        HandState s = random_state(rng, geom);
        const auto before = fingertip_positions(s, geom);
        s[DofId::spread_1] = spread(rng);
        s[DofId::spread_2] = spread(rng);
        s[DofId::spread_3] = spread(rng);
        const auto after = fingertip_positions(s, geom);
        for (Finger f : {Finger::index, Finger::ring, Finger::pinky}) {
            const auto& root = geom.finger(f).root.position;
            CHECK((after[index_of(f)] - root).norm() == doctest::Approx((before[index_of(f)] - root).norm()));
        }
        CHECK((after[index_of(Finger::middle)] - before[index_of(Finger::middle)]).norm() < 1e-12);
    }
}

TEST_CASE("spread moves index and pinky apart") {
    const auto geom = HandGeometry::defaults();
    const auto open = fingertip_positions(preset_pose("open"), geom);
    const auto spread = fingertip_positions(preset_pose("spread"), geom);
    const double gap_open = (open[index_of(Finger::index)] - open[index_of(Finger::pinky)]).norm();
    const double gap_spread = (spread[index_of(Finger::index)] - spread[index_of(Finger::pinky)]).norm();
    CHECK(gap_spread > gap_open + 20.0);
}

TEST_CASE("pinch preset brings thumb and index tips together") {
    const auto geom = HandGeometry::defaults();
    const auto tips = fingertip_positions(preset_pose("pinch"), geom);
    CHECK((tips[index_of(Finger::thumb)] - tips[index_of(Finger::index)]).norm() < 5.0);
}

TEST_CASE("presets are within limits and unknown names are rejected") {
    const auto geom = HandGeometry::defaults();
    for (const auto& name : preset_names()) CHECK_NOTHROW(check_limits(preset_pose(name), geom));
    CHECK(preset_pose("open") == HandState{});
    try {
        preset_pose("wave");
        FAIL("expected InputError");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("fist") != std::string::npos);
    }
}
