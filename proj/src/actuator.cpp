#include "softhand/actuator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "softhand/error.hpp"

namespace softhand::actuator {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

// Distance from the bellow base to the displaced midsection edge.
double slant_length(const BellowSpec& spec) {
    return std::sqrt(spec.x * spec.x + spec.delta_d * spec.delta_d / 4.0);
}

void require(bool ok, const char* message) {
    if (!ok) throw InputError(message);
}

}  // namespace

void BellowSpec::validate() const {
    require(std::isfinite(x) && x > 0.0, "bellow x must be > 0");
    require(std::isfinite(d) && d > 0.0, "bellow d must be > 0");
    require(std::isfinite(delta_d) && delta_d >= 0.0, "bellow delta_d must be >= 0");
    require(std::isfinite(wall) && wall > 0.0, "bellow wall must be > 0");
    require(std::isfinite(rated_pressure) && rated_pressure > 0.0, "rated_pressure must be > 0");
}

void CalibrationCurve::validate() const {
    require(std::isfinite(slope) && slope > 0.0, "calibration slope must be > 0");
    require(max_pressure > 0.0 && max_pressure <= kHardwareMaxPressure,
            "calibration max_pressure must be in (0, 2500] mbar");
}

double bend_radius(const BellowSpec& spec) {
    spec.validate();
    if (spec.delta_d == 0.0) throw NoExpansionError();
    return spec.d * slant_length(spec) / spec.delta_d;
}

double bend_angle_per_chamber(const BellowSpec& spec) {
    spec.validate();
    if (spec.delta_d == 0.0) return 0.0;
    return 2.0 * std::asin(spec.delta_d / (2.0 * slant_length(spec))) * kRadToDeg;
}

int chambers_for_angle(const BellowSpec& spec, double target_deg) {
    require(std::isfinite(target_deg) && target_deg > 0.0, "target angle must be > 0");
    const double per_chamber = bend_angle_per_chamber(spec);
    if (per_chamber <= 0.0) throw UnreachableTargetError();
    auto n = static_cast<int>(std::ceil(target_deg / per_chamber));
    // ceil() of a rounded quotient can land one off either way.
    while (n > 1 && (n - 1) * per_chamber >= target_deg) --n;
    while (n * per_chamber < target_deg) ++n;
    return n;
}

double pressure_to_angle(const CalibrationCurve& curve, double pressure_mbar) {
    require(!(pressure_mbar < 0.0) && !std::isnan(pressure_mbar), "pressure must be >= 0");
    return curve.slope * std::min(pressure_mbar, curve.max_pressure);
}

double angle_to_pressure(const CalibrationCurve& curve, double angle_deg) {
    require(!(angle_deg < 0.0) && !std::isnan(angle_deg), "angle must be >= 0");
    return std::min(angle_deg / curve.slope, curve.max_pressure);
}

CalibrationCurve fit_calibration(std::span<const PressureAngleSample> samples, double max_pressure) {
    if (samples.size() < 2) throw DegenerateFitError();
    double sum_pt = 0.0;
    double sum_pp = 0.0;
    for (const auto& s : samples) {
        require(s.pressure >= 0.0 && s.angle >= 0.0, "samples must have pressure >= 0 and angle >= 0");
        sum_pt += s.pressure * s.angle;
        sum_pp += s.pressure * s.pressure;
    }
    if (sum_pp == 0.0) throw DegenerateFitError();
    CalibrationCurve curve{sum_pt / sum_pp, max_pressure};
    curve.validate();
    return curve;
}

double fit_residual_rms(const CalibrationCurve& curve, std::span<const PressureAngleSample> samples) {
    if (samples.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& s : samples) {
        const double r = s.angle - curve.slope * s.pressure;
        sum += r * r;
    }
    return std::sqrt(sum / static_cast<double>(samples.size()));
}

std::vector<Finding> validate_spec(const ActuatorSpec& spec) {
    std::vector<Finding> findings;
    const double wall = spec.bellow.wall;
    if (!(wall >= 1.0 && wall <= 2.0)) {
        findings.push_back({Severity::violation, "wall",
                            "wall thickness " + std::to_string(wall) +
                                " mm outside 1-2 mm: too thin ruptures, too thick does not deform"});
    }
    if (spec.chamber_count < 12 || spec.chamber_count > 15) {
        findings.push_back({Severity::warning, "chamber_count",
                            "chamber count " + std::to_string(spec.chamber_count) +
                                " outside the validated 12-15 range"});
    }
    if (spec.chamber_thickness != 5.0) {
        findings.push_back({Severity::warning, "chamber_thickness",
                            "chamber thickness " + std::to_string(spec.chamber_thickness) +
                                " mm differs from the validated 5 mm"});
    }
    return findings;
}

}  // namespace softhand::actuator
