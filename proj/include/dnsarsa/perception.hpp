#pragma once

// Perceptual, CoS and motor fields of the behavior engine.
//
// The perceptual and CoS fields live on (hue bin x image column). Hue bins
// are split into K equal bands, one per behavior/color. An active intention
// lays a ridge along its color's hue row in both fields; where the ridge
// meets a perceived block the perceptual field forms a peak. The CoS field
// sees only the central window of columns, so it peaks once the intended
// block is centred. The motor field spans relative bearing over the full
// circle and turns the intended peak into an angular velocity.

#include <cstddef>
#include <vector>

#include "dnsarsa/behavior.hpp"
#include "dnsarsa/dnf.hpp"
#include "dnsarsa/matrix.hpp"

namespace dnsarsa {

/// Shared layout of hue x column maps.
struct PerceptGeometry {
    std::size_t behaviors = 4;  ///< K colors
    std::size_t hue_bins = 8;   ///< H >= K
    std::size_t columns = 60;   ///< P >= 8
    double fov = 2.0943951023931953;  ///< radians (120 deg)

    /// Hue row at the centre of color k's band.
    std::size_t hue_row(std::size_t color) const;
    /// Band (color) a hue row belongs to.
    std::size_t band_of_row(std::size_t row) const;
    /// Bearing (radians, + = counter-clockwise) at the centre of column p.
    double column_bearing(double p) const;
    /// Fractional column coordinate of a bearing.
    double bearing_column(double bearing) const;
};

void validate(const PerceptGeometry& g);

struct PerceptionParams {
    PerceptGeometry geometry;
    FieldParams percept;  ///< rows/cols are overwritten from geometry
    FieldParams cos;
    FieldParams motor;    ///< 1D over relative bearing, cols = motor_bins
    double ridge_percept = 4.5;  ///< intention ridge amplitude in the perceptual field
    /// The CoS field leans on the intention ridge more than on the percept,
    /// so a block that is already centred cannot complete a behavior before
    /// its intention is actually up.
    double ridge_cos = 4.0;      ///< intention ridge amplitude in the CoS field
    double ridge_hue_sigma = 1.0;  ///< ridge spread across hue rows (bins)
    double percept_to_cos = 3.0;   ///< gain of f(percept) into the CoS window
    double center_window = 0.2;    ///< fraction of columns visible to the CoS field
    std::size_t motor_bins = 120;
    double percept_to_motor = 4.0;
    double motor_sigma = 1.5;  ///< bins
    double k_p = 3.0;          ///< 1/s
    double omega_max = 1.5707963267948966;
    double omega_search = 1.0471975511965976;

    /// Defaults with all grid shapes filled in.
    static PerceptionParams defaults();
    /// Copies grid shapes from geometry into the field parameter blocks.
    void sync_shapes();
};

void validate(const PerceptionParams& p, double dt);

struct PerceptField {
    FieldGrid field;
};

struct CoSField {
    FieldGrid field;
    std::vector<double> window;  ///< per-column mask, 1 inside the centre window
};

struct MotorField {
    FieldGrid field;
};

struct PerceptionState {
    PerceptField percept;
    CoSField cos;
    MotorField motor;

    static PerceptionState at_rest(const PerceptionParams& p);
};

/// Ridge input for both fields: amplitude * f(d_i^int) along color i's hue row.
Matrix intention_ridge(const PerceptGeometry& g, const EBSet& eb, double amplitude, double hue_sigma);

/// Perceptual field input = percept map + ridge; CoS field input =
/// percept_to_cos * f(percept) inside the centre window + ridge.
void step_percept_and_cos_fields(const Matrix& percept_input, const EBSet& eb, PerceptionState& st,
                                 const PerceptionParams& p, double dt);

/// Per behavior: summed output of supra-threshold CoS field cells in its hue band.
std::vector<double> cos_field_input(const CoSField& cf, const PerceptGeometry& g);

/// Advances the motor field on the active intention's hue band of the
/// perceptual field and decodes an angular velocity:
///   no active intention          -> 0
///   supra-threshold motor peak   -> clamp(k_p * bearing, +-omega_max)
///   otherwise                    -> omega_search
double motor_command(PerceptionState& st, const EBSet& eb, const PerceptionParams& p, double dt);

/// Bearing of the supra-threshold motor peak (centroid over its connected
/// supra-threshold region on the circle), or NaN when there is none.
double decode_motor_bearing(const MotorField& mf);

/// Angular velocity for a given peak bearing (NaN = no peak).
double servo_omega(double bearing, const PerceptionParams& p);

}  // namespace dnsarsa
