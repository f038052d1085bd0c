#include "softhand/session.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <thread>

#include <nlohmann/json.hpp>

#include "softhand/error.hpp"

namespace softhand::teleop {

double SteadyClock::now() {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
}

void SteadyClock::sleep_until(double t) {
    using namespace std::chrono;
    std::this_thread::sleep_until(steady_clock::time_point(duration_cast<steady_clock::duration>(duration<double>(t))));
}

ReplaySource::ReplaySource(std::vector<TrackedFrame> frames) : frames_(std::move(frames)) {}

std::optional<TrackedFrame> ReplaySource::take_latest(double elapsed, std::size_t& dropped) {
    if (next_ >= frames_.size()) return std::nullopt;
    const double t0 = frames_.front().t;
    // Tolerate rounding in tick arithmetic against recorded timestamps.
    const double horizon = elapsed + 1e-9;
    std::size_t last = next_;
    if (frames_[last].t - t0 > horizon) return std::nullopt;
    while (last + 1 < frames_.size() && frames_[last + 1].t - t0 <= horizon) ++last;
    dropped += last - next_;
    next_ = last + 1;
    return frames_[last];
}

void FrameMailbox::post(const TrackedFrame& frame) {
    std::lock_guard lock(mutex_);
    if (closed_) return;
    if (slot_) ++overwritten_;
    slot_ = frame;
}

void FrameMailbox::close() {
    std::lock_guard lock(mutex_);
    closed_ = true;
}

std::optional<TrackedFrame> FrameMailbox::take_latest(double, std::size_t& dropped) {
    std::lock_guard lock(mutex_);
    dropped += overwritten_;
    overwritten_ = 0;
    auto out = std::move(slot_);
    slot_.reset();
    return out;
}

bool FrameMailbox::exhausted() const {
    std::lock_guard lock(mutex_);
    return closed_ && !slot_;
}

Stats Stats::of(std::vector<double> samples) {
    Stats s;
    s.count = samples.size();
    if (samples.empty()) return s;
    std::sort(samples.begin(), samples.end());
    auto quantile = [&samples](double q) {
        const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(samples.size())));
        return samples[std::min(samples.size() - 1, rank == 0 ? 0 : rank - 1)];
    };
    s.min = samples.front();
    s.max = samples.back();
    s.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
    s.p50 = quantile(0.5);
    s.p99 = quantile(0.99);
    return s;
}

namespace {

nlohmann::json stats_json(const Stats& s) {
    return {{"count", s.count}, {"min", s.min}, {"mean", s.mean}, {"p50", s.p50}, {"p99", s.p99}, {"max", s.max}};
}

}  // namespace

nlohmann::json SessionReport::to_json() const {
    nlohmann::json j = {{"ticks_sent", ticks_sent},
                        {"idle_ticks", idle_ticks},
                        {"frames_received", frames_received},
                        {"frames_dropped", frames_dropped},
                        {"clamped_angles", clamped_angles},
                        {"arm_rejections", arm_rejections},
                        {"duration_s", duration_s},
                        {"latency_ms", stats_json(latency_ms)},
                        {"jitter_ms", stats_json(jitter_ms)},
                        {"aborted", aborted}};
    if (!error.empty()) j["error"] = error;
    return j;
}

SessionReport run_teleop(FrameSource& source, PressureSink& valves, PoseSink& arm,
                         const FrameAlignment& alignment, const hand::HandGeometry& geom,
                         const SessionOptions& options, Clock& clock) {
    if (!(options.rate_hz > 0.0)) throw InputError("command rate must be > 0 Hz");
    const double period = 1.0 / options.rate_hz;
    std::optional<PoseSmoother> smoother;
    if (options.smoothing_alpha) smoother.emplace(*options.smoothing_alpha);

    SessionReport report;
    std::vector<double> latencies;
    std::vector<double> jitters;
    const double start = clock.now();
    std::optional<double> previous_tick;
    std::size_t tick = 0;

    auto finish = [&] {
        report.duration_s = clock.now() - start;
        report.latency_ms = Stats::of(latencies);
        report.jitter_ms = Stats::of(jitters);
        return report;
    };

    while (true) {
        if (options.stop && options.stop->load()) break;
        if (source.exhausted()) break;
        const double scheduled = start + static_cast<double>(tick) * period;
        if (scheduled - start > options.max_duration_s + 1e-9) break;
        clock.sleep_until(scheduled);
        const double tick_start = clock.now();
        if (previous_tick) jitters.push_back(std::abs(tick_start - *previous_tick - period) * 1e3);
        previous_tick = tick_start;

        std::size_t dropped = 0;
        std::optional<TrackedFrame> frame = source.take_latest(tick_start - start, dropped);
        report.frames_dropped += dropped;
        report.frames_received += dropped + (frame ? 1 : 0);

        if (frame) {
            FrameCommands commands = frame_to_commands(*frame, alignment, geom);
            if (smoother) commands.arm_target = smoother->update(commands.arm_target);
            report.clamped_angles += commands.clamped;
            MoveResult move = MoveResult::accepted;
            try {
                move = arm.move(commands.arm_target);
                valves.write_pressures(commands.pressures);
            } catch (const TransportError& e) {
                report.aborted = true;
                report.error = e.what();
                return finish();
            } catch (const ProtocolError& e) {
                report.aborted = true;
                report.error = e.what();
                return finish();
            }
            if (move == MoveResult::rejected_workspace) ++report.arm_rejections;
            ++report.ticks_sent;
            latencies.push_back((clock.now() - tick_start) * 1e3);
            if (options.on_tick) options.on_tick(TickInfo{&commands, move, report});
        } else {
            ++report.idle_ticks;
            if (options.on_tick) options.on_tick(TickInfo{nullptr, MoveResult::accepted, report});
        }

        if (source.exhausted()) break;
        // A late tick skips the slots it missed instead of bursting to catch up.
        ++tick;
        const double behind = clock.now() - start;
        const auto due = static_cast<std::size_t>(std::floor(behind / period));
        if (due >= tick) tick = due + 1;
    }
    return finish();
}

}  // namespace softhand::teleop
