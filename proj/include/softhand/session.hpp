#pragma once

// Fixed-rate teleoperation command loop. Each tick takes the freshest frame
// from the source (older unconsumed frames are dropped) and sends one arm
// target plus one full pressure vector.

#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "softhand/teleop.hpp"

namespace softhand::teleop {

class Clock {
  public:
    virtual ~Clock() = default;
    virtual double now() = 0;  // s, monotonic
    virtual void sleep_until(double t) = 0;
};

class SteadyClock final : public Clock {
  public:
    double now() override;
    void sleep_until(double t) override;
};

// Time only moves when someone sleeps; for deterministic tests.
class ManualClock final : public Clock {
  public:
    explicit ManualClock(double start = 0.0) : now_(start) {}
    double now() override { return now_; }
    void sleep_until(double t) override {
        if (t > now_) now_ = t;
    }
    void advance(double dt) { now_ += dt; }

  private:
    double now_;
};

class FrameSource {
  public:
    virtual ~FrameSource() = default;
    // Newest frame available at `elapsed` seconds into the session, if any
    // arrived since the last call; adds skipped frames to `dropped`.
    virtual std::optional<TrackedFrame> take_latest(double elapsed, std::size_t& dropped) = 0;
    // True once no further frames can ever arrive.
    virtual bool exhausted() const = 0;
};

// Replays recorded frames on their own timeline, relative to the first timestamp.
class ReplaySource final : public FrameSource {
  public:
    explicit ReplaySource(std::vector<TrackedFrame> frames);
    std::optional<TrackedFrame> take_latest(double elapsed, std::size_t& dropped) override;
    bool exhausted() const override { return next_ >= frames_.size(); }
    std::size_t size() const { return frames_.size(); }

  private:
    std::vector<TrackedFrame> frames_;
    std::size_t next_ = 0;
};

// Latest-value mailbox fed from another thread: writers replace, the loop
// reads and clears.
class FrameMailbox final : public FrameSource {
  public:
    void post(const TrackedFrame& frame);
    void close();
    std::optional<TrackedFrame> take_latest(double elapsed, std::size_t& dropped) override;
    bool exhausted() const override;

  private:
    mutable std::mutex mutex_;
    std::optional<TrackedFrame> slot_;
    std::size_t overwritten_ = 0;
    bool closed_ = false;
};

enum class MoveResult { accepted, rejected_workspace };

class PressureSink {
  public:
    virtual ~PressureSink() = default;
    virtual void write_pressures(const hand::PressureVector& pressures) = 0;
};

class PoseSink {
  public:
    virtual ~PoseSink() = default;
    virtual MoveResult move(const Pose& target) = 0;
};

struct Stats {
    std::size_t count = 0;
    double min = 0.0;
    double mean = 0.0;
    double p50 = 0.0;
    double p99 = 0.0;
    double max = 0.0;

    static Stats of(std::vector<double> samples);
};

struct SessionReport {
    std::size_t ticks_sent = 0;
    std::size_t idle_ticks = 0;
    std::size_t frames_received = 0;
    std::size_t frames_dropped = 0;
    std::size_t clamped_angles = 0;
    std::size_t arm_rejections = 0;
    double duration_s = 0.0;
    Stats latency_ms;  // tick start -> both commands acknowledged
    Stats jitter_ms;   // |inter-tick interval - period|
    bool aborted = false;
    std::string error;

    nlohmann::json to_json() const;
};

struct TickInfo {
    const FrameCommands* commands = nullptr;  // null on an idle tick
    MoveResult move = MoveResult::accepted;
    const SessionReport& report;
};

struct SessionOptions {
    double rate_hz = 10.0;
    double max_duration_s = std::numeric_limits<double>::infinity();
    std::optional<double> smoothing_alpha;
    const std::atomic<bool>* stop = nullptr;
    std::function<void(const TickInfo&)> on_tick;
};

// Runs until the source is exhausted, the duration elapses or `stop` is set.
// Sink failures (TransportError, ProtocolError) end the session with
// `aborted = true` and a partial report.
SessionReport run_teleop(FrameSource& source, PressureSink& valves, PoseSink& arm,
                         const FrameAlignment& alignment, const hand::HandGeometry& geom,
                         const SessionOptions& options, Clock& clock);

}  // namespace softhand::teleop
