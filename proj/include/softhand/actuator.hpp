#pragma once

// Bellow geometry, chamber-series bending and the linear pressure/angle law.
// Units: millimeters, degrees, millibars.

#include <span>
#include <string>
#include <vector>

namespace softhand::actuator {

// One elastomeric chamber. `x` is half the bellow height (base to midsection),
// `d` the rest width, `delta_d` the midsection expansion reached at
// `rated_pressure`.
struct BellowSpec {
    double x = 7.5;
    double d = 5.0;
    double delta_d = 2.0;
    double wall = 1.5;
    double rated_pressure = 500.0;

    // Throws InputError when a field violates its range.
    void validate() const;
};

struct ActuatorSpec {
    BellowSpec bellow;
    int chamber_count = 12;
    double chamber_thickness = 5.0;
};

inline constexpr double kDefaultSlope = 0.272;        // deg / mbar
inline constexpr double kDefaultMaxPressure = 500.0;  // mbar
inline constexpr double kHardwareMaxPressure = 2500.0;

struct CalibrationCurve {
    double slope = kDefaultSlope;
    double max_pressure = kDefaultMaxPressure;

    void validate() const;
    bool operator==(const CalibrationCurve&) const = default;
};

struct PressureAngleSample {
    double pressure = 0.0;
    double angle = 0.0;
};

// Radius of the internal circle traced by the bent actuator.
// Throws NoExpansionError when delta_d == 0.
double bend_radius(const BellowSpec& spec);

// Bend contributed by one pressurized chamber, degrees. Exactly 0 for delta_d == 0.
double bend_angle_per_chamber(const BellowSpec& spec);

// Smallest chamber count whose summed bend reaches `target_deg`.
int chambers_for_angle(const BellowSpec& spec, double target_deg);

double pressure_to_angle(const CalibrationCurve& curve, double pressure_mbar);
double angle_to_pressure(const CalibrationCurve& curve, double angle_deg);

// Least-squares line through the origin.
CalibrationCurve fit_calibration(std::span<const PressureAngleSample> samples,
                                 double max_pressure = kDefaultMaxPressure);

// Root-mean-square angle residual of `curve` over `samples` (unclamped line).
double fit_residual_rms(const CalibrationCurve& curve, std::span<const PressureAngleSample> samples);

enum class Severity { violation, warning };

struct Finding {
    Severity severity;
    std::string parameter;
    std::string message;
};

// Wall thickness outside [1, 2] mm is a violation; chamber count outside
// [12, 15] or chamber thickness other than 5 mm is a warning.
std::vector<Finding> validate_spec(const ActuatorSpec& spec);

}  // namespace softhand::actuator
