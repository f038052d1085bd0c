#include "cli.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "softhand/actuator.hpp"
#include "softhand/config.hpp"
#include "softhand/error.hpp"
#include "softhand/fatigue.hpp"
#include "softhand/net/stack.hpp"
#include "softhand/net/ui_server.hpp"
#include "softhand/teleop.hpp"

namespace softhand::cli {

namespace {

using nlohmann::json;

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted = true; }

void install_signal_handlers() {
    g_interrupted = false;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
}

// Blocks until a signal arrives or `limit` seconds pass (when given).
void wait_for_shutdown(std::optional<double> limit) {
    const auto start = std::chrono::steady_clock::now();
    while (!g_interrupted) {
        if (limit && std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() >= *limit) break;
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
}

std::string fixed(double v, int digits) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

std::vector<actuator::PressureAngleSample> read_samples(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open samples file " + path);
    std::vector<actuator::PressureAngleSample> samples;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        for (char& ch : raw)
            if (ch == ',' || ch == ';' || ch == '\t') ch = ' ';
        std::istringstream fields(raw);
        std::string first;
        if (!(fields >> first)) continue;
        std::string second;
        std::string extra;
        if (!(fields >> second)) throw ParseError(line, "angle", "expected 'pressure angle'");
        if (fields >> extra) throw ParseError(line, "<record>", "more than two fields");
        actuator::PressureAngleSample s;
        try {
            std::size_t used = 0;
            s.pressure = std::stod(first, &used);
            if (used != first.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            if (samples.empty() && line == 1) continue;  // header row
            throw ParseError(line, "pressure", "not a number: '" + first + "'");
        }
        try {
            std::size_t used = 0;
            s.angle = std::stod(second, &used);
            if (used != second.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ParseError(line, "angle", "not a number: '" + second + "'");
        }
        if (s.pressure < 0.0) throw ParseError(line, "pressure", "must be >= 0");
        if (s.angle < 0.0) throw ParseError(line, "angle", "must be >= 0");
        samples.push_back(s);
    }
    if (samples.empty()) throw Error("samples file " + path + " holds no samples");
    return samples;
}

struct Globals {
    std::optional<std::string> config_path;
};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"softhand: pneumatic hand digital twin and teleoperation stack"};
    app.require_subcommand(1);
    Globals globals;
    std::string config_flag;
    app.add_option("--config", config_flag, "Config file (default: $SOFTHAND_CONFIG, else built-in defaults)");

    // design
    auto* design = app.add_subcommand("design", "Size a bellow actuator");
    actuator::BellowSpec bellow;
    double target_angle = 180.0;
    std::optional<int> chambers;
    bool design_json = false;
    design->add_option("--x", bellow.x, "Half bellow height, mm")->required();
    design->add_option("--d", bellow.d, "Bellow width at rest, mm")->required();
    design->add_option("--delta-d", bellow.delta_d, "Midsection expansion, mm")->required();
    design->add_option("--wall", bellow.wall, "Chamber wall thickness, mm")->capture_default_str();
    design->add_option("--target-angle", target_angle, "Total bend, deg")->capture_default_str();
    design->add_option("--chambers", chambers, "Chamber count to validate (default: the computed count)");
    design->add_flag("--json", design_json, "Print JSON");

    // fit
    auto* fit = app.add_subcommand("fit", "Fit a pressure->angle calibration line");
    std::string samples_path;
    double fit_max_pressure = actuator::kDefaultMaxPressure;
    std::string fit_dof;
    std::string fit_out;
    std::string fit_merge;
    fit->add_option("--samples", samples_path, "File of 'pressure angle' lines (mbar, deg)")->required();
    fit->add_option("--max-pressure", fit_max_pressure, "Clamp ceiling for the fitted curve, mbar")
        ->capture_default_str();
    fit->add_option("--dof", fit_dof, "Apply the curve to one DoF only (default: all 15)");
    fit->add_option("--out", fit_out, "Write the calibration fragment to this file");
    fit->add_option("--merge-into", fit_merge, "Merge the fragment into this config file in place");

    // sim
    auto* sim = app.add_subcommand("sim", "Run valve terminal and arm simulators");
    std::string sim_for;
    sim->add_option("--for", sim_for, "Stop after this long (e.g. 30s); default: until interrupted");

    // replay
    auto* replay = app.add_subcommand("replay", "Replay trajectory files against the configured endpoints");
    std::vector<std::string> replay_files;
    std::optional<double> replay_rate;
    std::string align = "first-frame";
    replay->add_option("--file", replay_files, "Trajectory file; give twice for a bi-manual config")->required();
    replay->add_option("--rate", replay_rate, "Command rate, Hz (default: config command_rate_hz)");
    replay->add_option("--align", align, "Frame alignment: first-frame or identity")
        ->check(CLI::IsMember({"first-frame", "identity"}))
        ->capture_default_str();

    // fatigue
    auto* fatigue_cmd = app.add_subcommand("fatigue", "Inflate/deflate endurance cycling on one channel");
    fatigue::FatigueOptions fatigue_opts;
    std::string duration_text = "2h";
    std::optional<double> time_scale;
    std::optional<double> fatigue_tau;
    std::size_t fatigue_unit = 0;
    fatigue_cmd->add_option("--channel", fatigue_opts.channel, "Valve channel 0..15")->required();
    fatigue_cmd->add_option("--pressure", fatigue_opts.pressure, "Peak pressure, mbar")->capture_default_str();
    fatigue_cmd->add_option("--cpm", fatigue_opts.cpm, "Cycles per minute")->capture_default_str();
    fatigue_cmd->add_option("--duration", duration_text, "Test length (2h, 1m, 90s)")->capture_default_str();
    fatigue_cmd->add_option("--time-scale", time_scale,
                            "Use an in-process terminal on simulated time, this many times faster than "
                            "wall clock (0 = unthrottled)");
    fatigue_cmd->add_option("--tau", fatigue_tau, "Valve time constant for --time-scale runs, s");
    fatigue_cmd->add_option("--unit", fatigue_unit, "Configured unit whose valve terminal to drive")
        ->capture_default_str();

    // serve-ui
    auto* serve_ui = app.add_subcommand("serve-ui", "Serve the operator console WebSocket endpoint /ws");
    std::optional<std::uint16_t> ui_port;
    std::size_t ui_unit = 0;
    bool with_sim = false;
    std::string replay_dir = ".";
    std::string ui_for;
    serve_ui->add_option("--port", ui_port, "Listen port (default: config ui.port)");
    serve_ui->add_option("--unit", ui_unit, "Configured unit to drive")->capture_default_str();
    serve_ui->add_flag("--with-sim", with_sim, "Also start the simulators in this process");
    serve_ui->add_option("--replay-dir", replay_dir, "Directory start_replay file names resolve against")
        ->capture_default_str();
    serve_ui->add_option("--for", ui_for, "Stop after this long; default: until interrupted");

    // print-config
    auto* print_config = app.add_subcommand("print-config", "Print the effective configuration as JSON");
    std::string print_out;
    print_config->add_option("--out", print_out, "Write to this file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        std::ostringstream msg;
        app.exit(e, msg, msg);
        err << msg.str();
        return e.get_exit_code() == 0 ? kOk : kUsage;
    }
    if (!config_flag.empty()) globals.config_path = config_flag;

    try {
        if (design->parsed()) {
            const double r = actuator::bend_radius(bellow);
            const double theta = actuator::bend_angle_per_chamber(bellow);
            const int n = actuator::chambers_for_angle(bellow, target_angle);
            actuator::ActuatorSpec spec{bellow, chambers.value_or(n), bellow.d};
            const auto findings = actuator::validate_spec(spec);
            if (design_json) {
                json f = json::array();
                for (const auto& fi : findings)
                    f.push_back({{"severity", fi.severity == actuator::Severity::violation ? "violation" : "warning"},
                                 {"parameter", fi.parameter},
                                 {"message", fi.message}});
                out << json{{"radius_mm", r}, {"angle_per_chamber_deg", theta}, {"target_angle_deg", target_angle},
                            {"chambers", n}, {"findings", f}}
                           .dump()
                    << '\n';
            } else {
                out << "bend radius r        " << fixed(r, 2) << " mm\n"
                    << "angle per chamber    " << fixed(theta, 2) << " deg\n"
                    << "target angle         " << fixed(target_angle, 1) << " deg\n"
                    << "chambers n           " << n << "\n";
                if (findings.empty()) out << "findings             none\n";
                for (const auto& fi : findings)
                    out << (fi.severity == actuator::Severity::violation ? "VIOLATION  " : "warning    ")
                        << fi.parameter << ": " << fi.message << '\n';
            }
            bool violated = false;
            for (const auto& fi : findings) violated |= fi.severity == actuator::Severity::violation;
            return violated ? kRuntime : kOk;
        }

        if (fit->parsed()) {
            const auto samples = read_samples(samples_path);
            const auto curve = actuator::fit_calibration(samples, fit_max_pressure);
            const double rms = actuator::fit_residual_rms(curve, samples);
            out << "slope " << std::setprecision(12) << curve.slope << " deg/mbar\n"
                << "rms   " << std::setprecision(6) << rms << " deg\n"
                << "n     " << samples.size() << '\n';
            json curves = json::object();
            const json entry = {{"slope", curve.slope}, {"max_pressure_mbar", curve.max_pressure}};
            if (!fit_dof.empty()) {
                if (!hand::dof_from_name(fit_dof)) throw InputError("unknown dof '" + fit_dof + "'");
                curves[fit_dof] = entry;
            } else {
                for (hand::DofId id : hand::all_dofs()) curves[std::string(hand::dof_name(id))] = entry;
            }
            const json fragment = {{"hand", {{"calibration", curves}}}};
            if (!fit_out.empty()) {
                std::ofstream f(fit_out);
                if (!f) throw Error("cannot write " + fit_out);
                f << fragment.dump(2) << '\n';
            }
            if (!fit_merge.empty()) {
                json base = config::to_json(config::load(fit_merge));
                base.merge_patch(fragment);
                config::save(config::from_json(base), fit_merge);
            }
            return kOk;
        }

        const config::StackConfig cfg = config::load_or_default(globals.config_path);

        if (print_config->parsed()) {
            if (print_out.empty()) {
                out << config::to_json(cfg).dump(2) << '\n';
            } else {
                config::save(cfg, print_out);
            }
            return kOk;
        }

        if (sim->parsed()) {
            std::optional<double> limit;
            if (!sim_for.empty()) limit = fatigue::parse_duration(sim_for);
            install_signal_handlers();
            auto sims = net::start_simulators(cfg);
            for (std::size_t i = 0; i < cfg.units.size(); ++i) {
                out << "valve " << cfg.units[i].name << " listening on " << sims.valves[i]->endpoint().str() << '\n'
                    << "arm   " << cfg.units[i].name << " listening on " << sims.arms[i]->endpoint().str() << '\n';
            }
            out.flush();
            wait_for_shutdown(limit);
            sims.stop();
            out << "stopped\n";
            return kOk;
        }

        if (replay->parsed()) {
            if (replay_files.size() > cfg.units.size())
                throw InputError("got " + std::to_string(replay_files.size()) + " files for " +
                                 std::to_string(cfg.units.size()) + " configured unit(s)");
            std::vector<std::vector<teleop::TrackedFrame>> trajectories;
            for (const auto& f : replay_files) trajectories.push_back(teleop::load_trajectory(f));
            net::ReplayOptions opts;
            opts.rate_hz = replay_rate.value_or(cfg.command_rate_hz);
            opts.align = align == "identity" ? net::AlignMode::identity : net::AlignMode::first_frame;
            std::vector<teleop::SessionReport> reports(trajectories.size());
            std::vector<std::string> errors(trajectories.size());
            std::vector<std::thread> workers;
            for (std::size_t i = 0; i < trajectories.size(); ++i) {
                workers.emplace_back([&, i] {
                    try {
                        reports[i] = net::replay(cfg, cfg.units[i], std::move(trajectories[i]), opts);
                    } catch (const std::exception& e) {
                        errors[i] = e.what();
                    }
                });
            }
            for (auto& w : workers) w.join();
            bool failed = false;
            for (std::size_t i = 0; i < reports.size(); ++i) {
                if (!errors[i].empty()) {
                    err << "unit " << cfg.units[i].name << ": " << errors[i] << '\n';
                    failed = true;
                    continue;
                }
                json j = reports[i].to_json();
                j["unit"] = cfg.units[i].name;
                out << j.dump() << '\n';
                failed |= reports[i].aborted;
            }
            return failed ? kRuntime : kOk;
        }

        if (fatigue_cmd->parsed()) {
            fatigue_opts.duration_s = fatigue::parse_duration(duration_text);
            fatigue_opts.validate();
            install_signal_handlers();
            fatigue::FatigueReport report;
            if (time_scale) {
                fatigue::SimulatedValvePort port(fatigue_tau.value_or(cfg.valve_tau_s), *time_scale);
                report = fatigue::run_fatigue(port, fatigue_opts, {}, &g_interrupted);
            } else {
                if (fatigue_unit >= cfg.units.size()) throw InputError("no such unit");
                net::RemoteValvePort port(cfg.units[fatigue_unit].valve);
                report = fatigue::run_fatigue(port, fatigue_opts, {}, &g_interrupted);
            }
            out << report.to_json().dump() << '\n';
            return kOk;
        }

        if (serve_ui->parsed()) {
            std::optional<double> limit;
            if (!ui_for.empty()) limit = fatigue::parse_duration(ui_for);
            if (ui_unit >= cfg.units.size()) throw InputError("no such unit");
            install_signal_handlers();
            std::optional<net::Simulators> sims;
            if (with_sim) sims = net::start_simulators(cfg);
            net::UiServerOptions opts;
            opts.bind = {"127.0.0.1", ui_port.value_or(cfg.ui_port)};
            opts.config = cfg;
            opts.unit = ui_unit;
            opts.replay_dir = replay_dir;
            net::UiServer server(opts);
            out << "ui listening on ws://" << opts.bind.host << ':' << server.port() << "/ws\n";
            out.flush();
            wait_for_shutdown(limit);
            server.stop();
            if (sims) sims->stop();
            out << "stopped\n";
            return kOk;
        }
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntime;
    }
    return kUsage;
}

}  // namespace softhand::cli
