#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "dnsarsa/behavior.hpp"
#include "dnsarsa/environment.hpp"
#include "dnsarsa/errors.hpp"
#include "dnsarsa/events.hpp"
#include "dnsarsa/perception.hpp"
#include "support.hpp"

using namespace dnsarsa;
using dnsarsa::testing::scripted_eb;

namespace {

constexpr double kDt = 1.0 / 32.0;

void settle(EBSet& eb, double seconds, const std::vector<double>& cos_in) {
    for (int n = 0; n < static_cast<int>(seconds / kDt); ++n) {
        step_cos_nodes(eb, cos_in, kDt);
        step_intention_nodes(eb, kDt);
    }
}

int supra_intentions(const EBSet& eb) {
    int n = 0;
    for (std::size_t i = 0; i < eb.size(); ++i) n += eb.f_int(i) > 0.5;
    return n;
}

}  // namespace

TEST_CASE("no intention is selected without value drive") {
    EBSet eb = scripted_eb(4);
    std::fill(eb.d_val.begin(), eb.d_val.end(), 0.05);
    settle(eb, 3.0, std::vector<double>(4, 0.0));
    CHECK(supra_intentions(eb) == 0);
}

TEST_CASE("one-hot value selects that intention and suppresses the rest") {
    EBSet eb = scripted_eb(4);
    eb.d_val = {0.0, 0.0, 1.0, 0.0};
    const std::vector<double> none(4, 0.0);
    double crossed = -1.0;
    for (int n = 0; n < 64; ++n) {
        step_cos_nodes(eb, none, kDt);
        step_intention_nodes(eb, kDt);
        if (crossed < 0.0 && eb.f_int(2) > 0.5) crossed = (n + 1) * kDt;
    }
    REQUIRE(crossed > 0.0);
    CHECK(crossed <= 1.0);
    CHECK(eb.active_intention() == 2);
    CHECK(supra_intentions(eb) == 1);
}

TEST_CASE("the CoS of the active behavior shuts its intention down") {
    // Needs the masked read-out: the completed behavior loses its value input.
    EBSet eb = scripted_eb(4);
    eb.d_val = {1.0, 0.0, 0.0, 0.0};
    settle(eb, 1.0, std::vector<double>(4, 0.0));
    REQUIRE(eb.active_intention() == 0);
    const std::vector<double> in{3.0, 0.0, 0.0, 0.0};
    const Matrix w = Matrix::square(4, 1.0);
    double off = -1.0;
    for (int n = 0; n < 64 && off < 0.0; ++n) {
        step_cos_nodes(eb, in, kDt);
        read_value_nodes(eb, w, {});
        step_intention_nodes(eb, kDt);
        if (eb.f_int(0) < 0.1) off = (n + 1) * kDt;
    }
    REQUIRE(off > 0.0);
    CHECK(off <= 1.0);
    CHECK(eb.active_cos() == 0);
}

TEST_CASE("CoS nodes rest without input and switch on with it") {
    EBSet eb = scripted_eb(4);
    settle(eb, 2.0, std::vector<double>(4, 0.0));
    CHECK(eb.cos_flags() == 0u);
    eb.d_int[1] = 5.0;
    for (int n = 0; n < 96; ++n) step_cos_nodes(eb, std::vector<double>{0.0, 3.0, 0.0, 0.0}, kDt);
    CHECK(eb.f_cos(1) > 0.5);
}

TEST_CASE("a competing intention delays a CoS onset") {
    auto onset = [](double competitor) {
        EBSet eb = scripted_eb(4);
        eb.d_int[3] = competitor;
        const std::vector<double> in{0.0, 1.5, 0.0, 0.0};
        for (int n = 0; n < 320; ++n) {
            step_cos_nodes(eb, in, kDt);
            if (eb.f_cos(1) > 0.5) return n * kDt;
        }
        return 1e9;
    };
    const double free_run = onset(-10.0);
    const double blocked = onset(10.0);
    CHECK(free_run < 10.0);
    CHECK(blocked > free_run);
}

TEST_CASE("CoS nodes hold the last completion and hand over to the next") {
    EBSet eb = scripted_eb(3);
    for (int n = 0; n < 64; ++n) step_cos_nodes(eb, std::vector<double>{3.0, 0.0, 0.0}, kDt);
    for (int n = 0; n < 64; ++n) step_cos_nodes(eb, std::vector<double>(3, 0.0), kDt);
    CHECK(eb.active_cos() == 0);
    for (int n = 0; n < 64; ++n) step_cos_nodes(eb, std::vector<double>{0.0, 3.0, 0.0}, kDt);
    CHECK(eb.active_cos() == 1);
    CHECK(eb.f_cos(0) < 0.5);
}

TEST_CASE("value read-out") {
    EBSet eb = scripted_eb(4);
    const ValueReadout plain{.epsilon = 1e-6, .mask_completed = false};

    read_value_nodes(eb, Matrix::square(4), {}, plain);
    for (double v : eb.d_val) CHECK(v == doctest::Approx(0.25));

    dnsarsa::testing::drive(eb, -1, 1, 1e9);
    Matrix w = Matrix::square(4);
    w(0, 1) = 0.2;
    w(1, 1) = 0.8;
    read_value_nodes(eb, w, {}, plain);
    CHECK(eb.d_val[0] == doctest::Approx(0.2));
    CHECK(eb.d_val[1] == doctest::Approx(0.8));
    CHECK(eb.d_val[2] == doctest::Approx(0.0));

    // The completed behavior's own share is masked by default.
    read_value_nodes(eb, w, {});
    CHECK(eb.d_val[0] == doctest::Approx(1.0));
    CHECK(eb.d_val[1] == doctest::Approx(0.0).epsilon(1e-6));

    // Negative raw values are clamped before normalising.
    w(2, 1) = -3.0;
    read_value_nodes(eb, w, {}, plain);
    CHECK(eb.d_val[2] == 0.0);

    CHECK_THROWS_AS(read_value_nodes(eb, Matrix::square(3), {}), ConfigError);
}

TEST_CASE("equal noise keeps the value ordering") {
    EBSet eb = scripted_eb(4);
    dnsarsa::testing::drive(eb, -1, 0, 1e9);
    Matrix w = Matrix::square(4);
    w(1, 0) = 0.5;
    w(2, 0) = 0.3;
    w(3, 0) = 0.1;
    for (double a : {0.0, 0.1, 1.0, 10.0}) {
        const std::vector<double> noise(4, a);
        read_value_nodes(eb, w, noise);
        CHECK(eb.d_val[1] > eb.d_val[2]);
        CHECK(eb.d_val[2] > eb.d_val[3]);
        double s = 0.0;
        for (double v : eb.d_val) s += v;
        CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("event extraction") {
    NodeTrace tr;
    tr.behaviors = 3;
    const std::vector<double> zero(3, 0.0);
    for (int n = 0; n < 50; ++n) tr.push(zero, zero);
    CHECK(extract_events(tr).empty());

    NodeTrace sq;
    sq.behaviors = 3;
    for (int b : {2, 0, 1}) {
        std::vector<double> fi(3, 0.0), fc(3, 0.0);
        fi[b] = 1.0;
        for (int n = 0; n < 20; ++n) sq.push(fi, zero);
        fc[b] = 1.0;
        sq.push(fi, fc);
        fi[b] = 0.0;
        for (int n = 0; n < 5; ++n) sq.push(fi, fc);
    }
    const auto ev = extract_events(sq);
    REQUIRE(ev.size() == 3);
    CHECK(ev[0].behavior == 2);
    CHECK(ev[1].behavior == 0);
    CHECK(ev[2].behavior == 1);
    for (std::size_t i = 0; i < ev.size(); ++i) {
        CHECK(ev[i].completed());
        if (i) CHECK(ev[i].t_on >= ev[i - 1].t_off);
    }

    NodeTrace clash;
    clash.behaviors = 2;
    clash.push(std::vector<double>{1.0, 1.0}, std::vector<double>{0.0, 0.0});
    CHECK_THROWS_AS(extract_events(clash), WtaViolation);
}

namespace {

PerceptionParams small_perception() {
    PerceptionParams p = PerceptionParams::defaults();
    p.sync_shapes();
    return p;
}

RingWorld single_block(int color, double bearing) {
    RingWorld w;
    w.heading = 1.0;
    w.blocks.push_back(Block{.angle = wrap_angle(1.0 + bearing), .color = color});
    return w;
}

EBSet intending(std::size_t k, int intention) {
    EBSet eb = scripted_eb(k);
    dnsarsa::testing::drive(eb, intention, -1);
    return eb;
}

double band_max(const Matrix& u, const PerceptGeometry& g, std::size_t band, bool centre_only, double window) {
    double m = -1e9;
    const double half = 0.5 * window * static_cast<double>(g.columns);
    const double mid = 0.5 * static_cast<double>(g.columns - 1);
    for (std::size_t r = 0; r < g.hue_bins; ++r) {
        if (g.band_of_row(r) != band) continue;
        for (std::size_t c = 0; c < g.columns; ++c) {
            if (centre_only && std::abs(static_cast<double>(c) - mid) > half) continue;
            m = std::max(m, u(r, c));
        }
    }
    return m;
}

}  // namespace

TEST_CASE("empty view leaves both fields sub-threshold") {
    const PerceptionParams p = small_perception();
    PerceptionState st = PerceptionState::at_rest(p);
    const EBSet eb = scripted_eb(4);
    const Matrix nothing(p.geometry.hue_bins, p.geometry.columns);
    for (int n = 0; n < 64; ++n) step_percept_and_cos_fields(nothing, eb, st, p, kDt);
    CHECK(st.percept.field.max_activation() < 0.0);
    CHECK(st.cos.field.max_activation() < 0.0);
}

TEST_CASE("intended block at the centre drives the CoS field") {
    const PerceptionParams p = small_perception();
    PerceptionState st = PerceptionState::at_rest(p);
    const EBSet eb = intending(4, 1);
    const Matrix in = render_percept(single_block(1, 0.0), p.geometry);
    double t_peak = -1.0;
    for (int n = 0; n < 96 && t_peak < 0.0; ++n) {
        step_percept_and_cos_fields(in, eb, st, p, kDt);
        if (band_max(st.cos.field.u, p.geometry, 1, true, p.center_window) > 0.0) t_peak = (n + 1) * kDt;
    }
    REQUIRE(t_peak > 0.0);
    CHECK(t_peak <= 2.5);  // slow CoS field: a glance is not a completion
    CHECK(cos_field_input(st.cos, p.geometry)[1] > 0.0);
}

TEST_CASE("intended block at the periphery makes a percept peak but no CoS peak") {
    const PerceptionParams p = small_perception();
    PerceptionState st = PerceptionState::at_rest(p);
    const EBSet eb = intending(4, 2);
    const Matrix in = render_percept(single_block(2, 0.8), p.geometry);
    for (int n = 0; n < 128; ++n) step_percept_and_cos_fields(in, eb, st, p, kDt);
    CHECK(band_max(st.percept.field.u, p.geometry, 2, false, 1.0) > 0.0);
    CHECK(cos_field_input(st.cos, p.geometry)[2] == 0.0);
}

TEST_CASE("servo and search") {
    const PerceptionParams p = small_perception();
    CHECK(servo_omega(30.0 * std::numbers::pi / 180.0, p) == doctest::Approx(std::numbers::pi / 2.0));
    CHECK(servo_omega(-30.0 * std::numbers::pi / 180.0, p) == doctest::Approx(-std::numbers::pi / 2.0));
    CHECK(servo_omega(0.1, p) == doctest::Approx(0.3));
    CHECK(servo_omega(std::nan(""), p) == p.omega_search);
}

TEST_CASE("motor field centres on the intended block") {
    const PerceptionParams p = small_perception();
    auto run = [&](double bearing, int steps) {
        PerceptionState st = PerceptionState::at_rest(p);
        const EBSet eb = intending(4, 3);
        const Matrix in = render_percept(single_block(3, bearing), p.geometry);
        double omega = 0.0;
        for (int n = 0; n < steps; ++n) {
            step_percept_and_cos_fields(in, eb, st, p, kDt);
            omega = motor_command(st, eb, p, kDt);
        }
        return omega;
    };
    CHECK(std::abs(run(0.0, 64)) < 0.02);
    CHECK(run(0.7, 64) == doctest::Approx(std::numbers::pi / 2.0));
    CHECK(run(0.3, 64) == doctest::Approx(0.9).epsilon(0.05).scale(0.0));
    CHECK(run(-0.2, 64) < 0.0);

    PerceptionState st = PerceptionState::at_rest(p);
    const EBSet eb = intending(4, 0);
    const Matrix nothing(p.geometry.hue_bins, p.geometry.columns);
    double omega = 0.0;
    for (int n = 0; n < 32; ++n) {
        step_percept_and_cos_fields(nothing, eb, st, p, kDt);
        omega = motor_command(st, eb, p, kDt);
    }
    CHECK(omega == p.omega_search);
}
