#include "softhand/fatigue.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "softhand/error.hpp"

namespace softhand::fatigue {

void FatigueOptions::validate() const {
    if (channel < 0 || channel >= static_cast<int>(valve::kChannels))
        throw InputError("channel " + std::to_string(channel) + " out of range 0..15");
    if (!(pressure > 0.0 && pressure <= valve::kMaxRegisterValue))
        throw InputError("fatigue pressure must be in (0, 2500] mbar");
    if (!(cpm > 0.0)) throw InputError("cycles per minute must be > 0");
    if (!(duration_s >= 0.0) || !std::isfinite(duration_s)) throw InputError("duration must be >= 0");
    if (!(sample_dt > 0.0)) throw InputError("sample interval must be > 0");
    if (!(pass_fraction > 0.0 && pass_fraction <= 1.0)) throw InputError("pass fraction must be in (0, 1]");
}

nlohmann::json FatigueReport::to_json() const {
    return {{"channel", channel},
            {"cycles_completed", cycles_completed},
            {"target_cycles", target_cycles},
            {"commanded_peak_mbar", commanded_peak},
            {"peak_actual_mbar", {{"min", peak_min}, {"mean", peak_mean}, {"max", peak_max}}},
            {"cycles_below_threshold", cycles_below_threshold},
            {"pass", pass}};
}

SimulatedValvePort::SimulatedValvePort(double tau, double time_scale) : terminal_(tau), time_scale_(time_scale) {
    if (!(time_scale >= 0.0)) throw InputError("time scale must be >= 0");
}

void SimulatedValvePort::command(int channel, double mbar) {
    terminal_.write_holding(static_cast<std::size_t>(channel),
                            static_cast<std::uint16_t>(std::lround(std::clamp(mbar, 0.0, 65535.0))));
}

double SimulatedValvePort::actual(int channel) {
    return terminal_.dynamics().channels.at(static_cast<std::size_t>(channel)).actual;
}

void SimulatedValvePort::wait(double dt) {
    terminal_.step(dt);
    simulated_time_ += dt;
    if (time_scale_ > 0.0) std::this_thread::sleep_for(std::chrono::duration<double>(dt / time_scale_));
}

std::size_t target_cycles(double duration_s, double cpm) {
    // Small epsilon so 7200 s * 20 / 60 lands on 2400, not 2399.999...
    return static_cast<std::size_t>(std::floor(duration_s * cpm / 60.0 + 1e-9));
}

double parse_duration(std::string_view text) {
    if (text.empty()) throw InputError("empty duration");
    double scale = 1.0;
    switch (text.back()) {
        case 'h':
            scale = 3600.0;
            text.remove_suffix(1);
            break;
        case 'm':
            scale = 60.0;
            text.remove_suffix(1);
            break;
        case 's':
            text.remove_suffix(1);
            break;
        default:
            break;
    }
    double value = 0.0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size() || !(value >= 0.0) || !std::isfinite(value))
        throw InputError("invalid duration '" + std::string(text) + "' (expected e.g. 2h, 1m, 90s)");
    return value * scale;
}

namespace {

// Holds the current command for `span` seconds; returns the highest reading.
double hold(ValvePort& port, int channel, double span, double sample_dt) {
    const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(span / sample_dt - 1e-9)));
    const double dt = span / static_cast<double>(steps);
    double peak = port.actual(channel);
    for (std::size_t i = 0; i < steps; ++i) {
        port.wait(dt);
        peak = std::max(peak, port.actual(channel));
    }
    return peak;
}

}  // namespace

FatigueReport run_fatigue(ValvePort& port, const FatigueOptions& options, const Progress& progress,
                          const std::atomic<bool>* stop) {
    options.validate();
    FatigueReport report;
    report.channel = options.channel;
    report.target_cycles = target_cycles(options.duration_s, options.cpm);
    report.commanded_peak = options.pressure;
    const double half_period = 30.0 / options.cpm;
    const double threshold = options.pass_fraction * options.pressure;

    double peak_sum = 0.0;
    for (std::size_t cycle = 0; cycle < report.target_cycles; ++cycle) {
        if (stop && stop->load()) break;
        port.command(options.channel, options.pressure);
        const double peak = hold(port, options.channel, half_period, options.sample_dt);
        port.command(options.channel, 0.0);
        hold(port, options.channel, half_period, options.sample_dt);

        if (cycle == 0) {
            report.peak_min = report.peak_max = peak;
        } else {
            report.peak_min = std::min(report.peak_min, peak);
            report.peak_max = std::max(report.peak_max, peak);
        }
        peak_sum += peak;
        if (peak < threshold) ++report.cycles_below_threshold;
        ++report.cycles_completed;
        if (progress) progress(cycle + 1, peak);
    }
    if (report.cycles_completed > 0) peak_sum /= static_cast<double>(report.cycles_completed);
    report.peak_mean = peak_sum;
    report.pass = report.cycles_completed == report.target_cycles && report.cycles_below_threshold == 0;
    return report;
}

}  // namespace softhand::fatigue
