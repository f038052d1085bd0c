#pragma once

// Inflate/deflate endurance cycling of one valve channel, with pass/fail on
// the pressure actually reached in each cycle.

#include <atomic>
#include <cstddef>
#include <functional>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

#include "softhand/valve.hpp"

namespace softhand::fatigue {

struct FatigueOptions {
    int channel = 0;
    double pressure = 400.0;     // mbar
    double cpm = 20.0;           // cycles per minute
    double duration_s = 7200.0;  // 2 h
    double sample_dt = 0.01;     // s between pressure samples
    double pass_fraction = 0.95;

    void validate() const;
};

struct FatigueReport {
    int channel = 0;
    std::size_t cycles_completed = 0;
    std::size_t target_cycles = 0;
    double commanded_peak = 0.0;
    double peak_min = 0.0;
    double peak_mean = 0.0;
    double peak_max = 0.0;
    std::size_t cycles_below_threshold = 0;
    bool pass = false;

    nlohmann::json to_json() const;
};

// What the harness drives: a real terminal over the wire or an in-process one.
class ValvePort {
  public:
    virtual ~ValvePort() = default;
    virtual void command(int channel, double mbar) = 0;
    virtual double actual(int channel) = 0;
    // Lets `dt` seconds of (real or simulated) time pass.
    virtual void wait(double dt) = 0;
};

// In-process terminal on a virtual clock. time_scale = simulated seconds per
// wall second; 0 runs unthrottled.
class SimulatedValvePort final : public ValvePort {
  public:
    explicit SimulatedValvePort(double tau = valve::kDefaultTau, double time_scale = 0.0);
    void command(int channel, double mbar) override;
    double actual(int channel) override;
    void wait(double dt) override;
    double simulated_time() const { return simulated_time_; }

  private:
    valve::ValveTerminal terminal_;
    double time_scale_;
    double simulated_time_ = 0.0;
};

std::size_t target_cycles(double duration_s, double cpm);

// "2h", "1m", "90s", "1.5h" or bare seconds. Throws InputError.
double parse_duration(std::string_view text);

using Progress = std::function<void(std::size_t cycle, double peak)>;

FatigueReport run_fatigue(ValvePort& port, const FatigueOptions& options, const Progress& progress = {},
                          const std::atomic<bool>* stop = nullptr);

}  // namespace softhand::fatigue
