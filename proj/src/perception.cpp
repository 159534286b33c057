#include "dnsarsa/perception.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "dnsarsa/errors.hpp"

namespace dnsarsa {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_pi(double a) {
    a = std::fmod(a + std::numbers::pi, kTwoPi);
    if (a < 0.0) a += kTwoPi;
    return a - std::numbers::pi;
}

double motor_bin_width(std::size_t bins) { return kTwoPi / static_cast<double>(bins); }

}  // namespace

std::size_t PerceptGeometry::hue_row(std::size_t color) const {
    return static_cast<std::size_t>((static_cast<double>(color) + 0.5) * static_cast<double>(hue_bins) /
                                    static_cast<double>(behaviors));
}

std::size_t PerceptGeometry::band_of_row(std::size_t row) const { return row * behaviors / hue_bins; }

double PerceptGeometry::column_bearing(double p) const {
    return ((p + 0.5) / static_cast<double>(columns) - 0.5) * fov;
}

double PerceptGeometry::bearing_column(double bearing) const {
    return (bearing / fov + 0.5) * static_cast<double>(columns) - 0.5;
}

void validate(const PerceptGeometry& g) {
    if (g.behaviors == 0) throw ConfigError("behavior count must be positive");
    if (g.hue_bins < g.behaviors) throw ConfigError("need at least one hue bin per color");
    if (g.columns < 8) throw ConfigError("need at least 8 image columns");
    if (!(g.fov > 0.0) || g.fov >= kTwoPi) throw ConfigError("field of view must be in (0, 2pi)");
}

PerceptionParams PerceptionParams::defaults() {
    PerceptionParams p;
    // Fields use a much steeper output than the nodes: the soft ramp has
    // heavy tails, and with beta = 4 a wide sub-threshold region inhibits
    // as much as a peak excites.
    p.percept.tau = 0.1;
    p.percept.h = -5.0;
    p.percept.sigmoid.beta = 20.0;
    p.percept.kernel = {.amp_exc = 1.5, .sigma_exc = 2.0, .amp_inh = 0.5, .sigma_inh = 4.0, .amp_global = 0.05};
    p.percept.dx = {2.0, 1.0};
    p.percept.boundary = {Boundary::Circular, Boundary::Zero};

    p.cos = p.percept;
    // Slow CoS field: a completion needs the target held at the fovea for a
    // while, not a glance while turning past it.
    p.cos.tau = 1.5;

    p.motor.tau = 0.1;
    p.motor.h = -5.0;
    p.motor.sigmoid.beta = 20.0;
    p.motor.kernel = {.amp_exc = 2.0, .sigma_exc = 2.0, .amp_inh = 0.5, .sigma_inh = 4.0, .amp_global = 0.2};
    p.motor.dx = {1.0, 1.0};
    p.motor.boundary = {Boundary::Zero, Boundary::Circular};
    p.sync_shapes();
    return p;
}

void PerceptionParams::sync_shapes() {
    percept.rows = cos.rows = geometry.hue_bins;
    percept.cols = cos.cols = geometry.columns;
    motor.rows = 1;
    motor.cols = motor_bins;
}

void validate(const PerceptionParams& p, double dt) {
    validate(p.geometry);
    validate(p.percept);
    validate(p.cos);
    validate(p.motor);
    for (const FieldParams* f : {&p.percept, &p.cos, &p.motor})
        if (dt > f->tau / 3.0 + 1e-15) throw ConfigError("dt exceeds tau/3 for a perception field");
    if (p.percept.rows != p.geometry.hue_bins || p.percept.cols != p.geometry.columns || p.cos.rows != p.percept.rows ||
        p.cos.cols != p.percept.cols || p.motor.rows != 1 || p.motor.cols != p.motor_bins)
        throw ConfigError("perception field shapes do not match geometry");
    if (!(p.center_window > 0.0) || p.center_window > 1.0) throw ConfigError("centre window must be in (0, 1]");
    if (p.motor_bins < 8) throw ConfigError("need at least 8 motor bins");
    if (!(p.omega_max > 0.0) || !(p.k_p > 0.0)) throw ConfigError("servo gains must be positive");
}

PerceptionState PerceptionState::at_rest(const PerceptionParams& p) {
    PerceptionState st;
    st.percept.field = FieldGrid::at_rest(p.percept);
    st.cos.field = FieldGrid::at_rest(p.cos);
    st.motor.field = FieldGrid::at_rest(p.motor);
    const std::size_t cols = p.geometry.columns;
    st.cos.window.assign(cols, 0.0);
    for (std::size_t c = 0; c < cols; ++c) {
        const double x = (static_cast<double>(c) + 0.5) / static_cast<double>(cols) - 0.5;
        if (std::abs(x) < 0.5 * p.center_window) st.cos.window[c] = 1.0;
    }
    return st;
}

Matrix intention_ridge(const PerceptGeometry& g, const EBSet& eb, double amplitude, double hue_sigma) {
    Matrix ridge(g.hue_bins, g.columns, 0.0);
    const auto h = static_cast<double>(g.hue_bins);
    for (std::size_t i = 0; i < eb.size(); ++i) {
        const double a = amplitude * eb.f_int(i);
        if (a == 0.0) continue;
        const auto centre = static_cast<double>(g.hue_row(i));
        for (std::size_t r = 0; r < g.hue_bins; ++r) {
            double d = std::abs(static_cast<double>(r) - centre);
            d = std::min(d, h - d);  // hue is circular
            const double w = a * std::exp(-d * d / (2.0 * hue_sigma * hue_sigma));
            for (std::size_t c = 0; c < g.columns; ++c) ridge(r, c) += w;
        }
    }
    return ridge;
}

void step_percept_and_cos_fields(const Matrix& percept_input, const EBSet& eb, PerceptionState& st,
                                 const PerceptionParams& p, double dt) {
    const PerceptGeometry& g = p.geometry;
    if (percept_input.rows() != g.hue_bins || percept_input.cols() != g.columns)
        throw ConfigError("percept map shape does not match geometry");

    Matrix s = intention_ridge(g, eb, p.ridge_percept, p.ridge_hue_sigma);
    for (std::size_t i = 0; i < s.size(); ++i) s.values()[i] += percept_input.values()[i];
    step_field_inplace(st.percept.field, s, dt);

    const Matrix out = st.percept.field.output();
    Matrix sc = intention_ridge(g, eb, p.ridge_cos, p.ridge_hue_sigma);
    for (std::size_t r = 0; r < g.hue_bins; ++r)
        for (std::size_t c = 0; c < g.columns; ++c) sc(r, c) += p.percept_to_cos * st.cos.window[c] * out(r, c);
    step_field_inplace(st.cos.field, sc, dt);
}

std::vector<double> cos_field_input(const CoSField& cf, const PerceptGeometry& g) {
    std::vector<double> in(g.behaviors, 0.0);
    const FieldGrid& f = cf.field;
    for (std::size_t r = 0; r < f.u.rows(); ++r) {
        const std::size_t band = g.band_of_row(r);
        for (std::size_t c = 0; c < f.u.cols(); ++c) {
            const double u = f.u(r, c);
            if (u > 0.0) in[band] += sigmoid(u, f.params.sigmoid);
        }
    }
    return in;
}

double decode_motor_bearing(const MotorField& mf) {
    const auto& u = mf.field.u.values();
    const std::size_t n = u.size();
    const auto best = static_cast<std::size_t>(std::max_element(u.begin(), u.end()) - u.begin());
    if (!(u[best] > 0.0)) return std::numeric_limits<double>::quiet_NaN();

    // Activation-weighted centroid over the connected supra-threshold run
    // containing the maximum, with offsets measured from the maximum so the
    // run may straddle the wrap point.
    double wsum = u[best];
    double off = 0.0;
    for (int dir : {-1, 1}) {
        for (std::size_t step = 1; step < n; ++step) {
            const long idx = (static_cast<long>(best) + dir * static_cast<long>(step)) % static_cast<long>(n);
            const auto j = static_cast<std::size_t>(idx < 0 ? idx + static_cast<long>(n) : idx);
            if (!(u[j] > 0.0) || j == best) break;
            wsum += u[j];
            off += u[j] * dir * static_cast<double>(step);
        }
    }
    const double centre_bin = static_cast<double>(best) + off / wsum;
    return wrap_pi(-std::numbers::pi + (centre_bin + 0.5) * motor_bin_width(n));
}

double servo_omega(double bearing, const PerceptionParams& p) {
    if (std::isnan(bearing)) return p.omega_search;
    return std::clamp(p.k_p * bearing, -p.omega_max, p.omega_max);
}

double motor_command(PerceptionState& st, const EBSet& eb, const PerceptionParams& p, double dt) {
    const PerceptGeometry& g = p.geometry;
    const std::size_t m = p.motor_bins;
    const int active = eb.active_intention();

    Matrix input(1, m, 0.0);
    if (active >= 0) {
        const auto band = static_cast<std::size_t>(active);
        const FieldGrid& pf = st.percept.field;
        const double bw = motor_bin_width(m);
        for (std::size_t c = 0; c < g.columns; ++c) {
            double v = 0.0;
            for (std::size_t r = 0; r < g.hue_bins; ++r)
                if (g.band_of_row(r) == band && pf.u(r, c) > 0.0) v = std::max(v, sigmoid(pf.u(r, c), pf.params.sigmoid));
            if (v == 0.0) continue;
            const double b = g.column_bearing(static_cast<double>(c));
            const double centre = (b + std::numbers::pi) / bw - 0.5;
            const auto reach = static_cast<long>(std::ceil(3.0 * p.motor_sigma));
            const auto c0 = static_cast<long>(std::lround(centre));
            for (long k = c0 - reach; k <= c0 + reach; ++k) {
                const double d = static_cast<double>(k) - centre;
                long idx = k % static_cast<long>(m);
                if (idx < 0) idx += static_cast<long>(m);
                input(0, static_cast<std::size_t>(idx)) +=
                    p.percept_to_motor * v * std::exp(-d * d / (2.0 * p.motor_sigma * p.motor_sigma));
            }
        }
    }
    step_field_inplace(st.motor.field, input, dt);
    if (active < 0) return 0.0;
    return servo_omega(decode_motor_bearing(st.motor), p);
}

}  // namespace dnsarsa
