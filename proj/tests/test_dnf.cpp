#include <cmath>
#include <random>

#include "doctest.h"
#include "dnsarsa/convolution.hpp"
#include "dnsarsa/dnf.hpp"
#include "dnsarsa/errors.hpp"

using namespace dnsarsa;

TEST_CASE("sigmoid reference values") {
    CHECK(sigmoid(0.0, {}) == doctest::Approx(0.5));
    CHECK(sigmoid(0.7, {.beta = 3.0, .mu = 0.7}) == doctest::Approx(0.5));
    CHECK(sigmoid(1.0, {.beta = 1.0, .mu = 0.0}) == doctest::Approx(0.75));
    CHECK(sigmoid(1e12, {}) == doctest::Approx(1.0));
    CHECK(sigmoid(-1e12, {}) == doctest::Approx(0.0));
}

TEST_CASE("sigmoid is bounded, monotone and point-symmetric") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> x(-50.0, 50.0), b(0.1, 30.0);
    for (int n = 0; n < 2000; ++n) {
        const SigmoidParams p{.beta = b(rng), .mu = x(rng) / 10.0};
        const double a = x(rng), c = x(rng);
        const double fa = sigmoid(a, p);
        CHECK(fa > 0.0);
        CHECK(fa < 1.0);
        if (a < c) CHECK(fa <= sigmoid(c, p));
        CHECK(fa + sigmoid(2.0 * p.mu - a, p) == doctest::Approx(1.0));
    }
}

TEST_CASE("kernel weight") {
    const KernelParams k{.amp_exc = 2.0, .sigma_exc = 3.0, .amp_inh = 1.0, .sigma_inh = 6.0, .amp_global = 0.0};
    CHECK(kernel_weight(3.0, k) == doctest::Approx(2.0 * std::exp(-0.5) - std::exp(-0.125)));
    CHECK(kernel_weight(3.0, k) == doctest::Approx(0.3305).epsilon(1e-3).scale(0.0));
    const KernelParams g{.amp_exc = 1.5, .sigma_exc = 2.0, .amp_inh = 0.5, .sigma_inh = 4.0, .amp_global = 0.05};
    CHECK(kernel_weight(0.0, g) == doctest::Approx(1.5 - 0.5 - 0.05));
    for (double d = 0.0; d < 20.0; d += 0.37) CHECK(kernel_weight(d, g) == kernel_weight(-d, g));
}

TEST_CASE("kernel validation") {
    CHECK_THROWS_AS(validate(KernelParams{.amp_exc = 1.0, .sigma_exc = 0.0, .amp_inh = 0.0, .sigma_inh = 1.0}),
                    ConfigError);
    CHECK_THROWS_AS(validate(KernelParams{.amp_exc = 1.0, .sigma_exc = 3.0, .amp_inh = 1.0, .sigma_inh = 2.0}),
                    ConfigError);
    CHECK_THROWS_AS(validate(KernelParams{.amp_exc = -1.0, .sigma_exc = 1.0, .amp_inh = 0.0, .sigma_inh = 2.0}),
                    ConfigError);
}

TEST_CASE("euler node step") {
    CHECK(euler_step_node(0.0, 1.0, 0.5, 1.0 / 32.0) == doctest::Approx(0.0625));
    CHECK(euler_step_node(0.3, 0.0, 0.5, 1.0 / 32.0) == 0.3);
    double x = 0.0;
    const double c = 2.5, tau = 0.4, dt = 1.0 / 32.0;
    for (int n = 0; n < static_cast<int>(10 * tau / dt); ++n) x = euler_step_node(x, -x + c, tau, dt);
    CHECK(std::abs(x - c) < 1e-3);
}

namespace {

FieldParams plain_field(std::size_t rows, std::size_t cols) {
    FieldParams p;
    p.tau = 0.2;
    p.h = -5.0;
    p.rows = rows;
    p.cols = cols;
    p.kernel = {.amp_exc = 0.0, .sigma_exc = 1.0, .amp_inh = 0.0, .sigma_inh = 2.0, .amp_global = 0.0};
    return p;
}

FieldParams lateral_field(std::size_t rows, std::size_t cols, Boundary b0, Boundary b1) {
    FieldParams p;
    p.tau = 0.1;
    p.h = -5.0;
    p.rows = rows;
    p.cols = cols;
    p.sigmoid.beta = 20.0;
    p.kernel = {.amp_exc = 1.5, .sigma_exc = 2.0, .amp_inh = 0.5, .sigma_inh = 4.0, .amp_global = 0.05};
    p.dx = {2.0, 1.0};
    p.boundary = {b0, b1};
    return p;
}

}  // namespace

TEST_CASE("field at rest without input is a fixed point") {
    FieldGrid f = FieldGrid::at_rest(plain_field(4, 9));
    const Matrix zero(4, 9);
    for (int n = 0; n < 100; ++n) step_field_inplace(f, zero, 1.0 / 32.0);
    for (double u : f.u.values()) CHECK(std::abs(u + 5.0) < 1e-12);
}

TEST_CASE("uniform sub-threshold input settles at h + s0") {
    FieldGrid f = FieldGrid::at_rest(plain_field(1, 30));
    const Matrix s(1, 30, 2.0);
    for (int n = 0; n < 200; ++n) step_field_inplace(f, s, 1.0 / 32.0);
    for (double u : f.u.values()) CHECK(u == doctest::Approx(-3.0).epsilon(1e-6));
}

TEST_CASE("localized input forms a peak that outlives the input") {
    FieldParams p = lateral_field(1, 60, Boundary::Zero, Boundary::Zero);
    p.kernel = {.amp_exc = 4.0, .sigma_exc = 2.0, .amp_inh = 1.0, .sigma_inh = 5.0, .amp_global = 0.02};
    p.dx = {1.0, 1.0};
    FieldGrid f = FieldGrid::at_rest(p);
    Matrix s(1, 60);
    for (std::size_t c = 0; c < 60; ++c) s(0, c) = 7.0 * std::exp(-std::pow((double(c) - 30.0) / 2.0, 2) / 2.0);
    for (int n = 0; n < 64; ++n) step_field_inplace(f, s, 1.0 / 32.0);
    CHECK(f.u(0, 30) > 0.0);
    for (double& v : s.values()) v *= 0.3;  // below the detection level, above zero
    for (int n = 0; n < 64; ++n) step_field_inplace(f, s, 1.0 / 32.0);
    CHECK(f.u(0, 30) > 0.0);
    CHECK(f.u(0, 5) < 0.0);
    CHECK(f.u(0, 55) < 0.0);
}

TEST_CASE("field step rejects bad shapes and time steps") {
    FieldGrid f = FieldGrid::at_rest(plain_field(2, 8));
    CHECK_THROWS_AS(step_field(f, Matrix(3, 8), 1.0 / 32.0), ConfigError);
    CHECK_THROWS_AS(step_field(f, Matrix(2, 8), 0.1), ConfigError);
}

TEST_CASE("serial and parallel lateral interaction agree") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> out(0.0, 1.0);
    const Boundary zb = Boundary::Zero, cb = Boundary::Circular;
    struct Shape {
        std::size_t rows, cols;
        Boundary b0, b1;
    };
    for (const Shape& sh : {Shape{1, 60, zb, zb}, Shape{1, 120, zb, cb}, Shape{8, 60, cb, zb}, Shape{8, 60, zb, zb},
                            Shape{16, 90, cb, cb}, Shape{96, 128, cb, zb}}) {
        const FieldParams p = lateral_field(sh.rows, sh.cols, sh.b0, sh.b1);
        Matrix o(sh.rows, sh.cols);
        for (double& v : o.values()) v = out(rng);
        const Matrix a = lateral_serial(o, p), b = lateral_parallel(o, p);
        REQUIRE(a.same_shape(b));
        double err = 0.0;
        for (std::size_t n = 0; n < a.size(); ++n) err = std::max(err, std::abs(a.values()[n] - b.values()[n]));
        CHECK(err < 1e-10);
    }
}

TEST_CASE("serial and parallel field steps agree") {
    const FieldParams p = lateral_field(8, 60, Boundary::Circular, Boundary::Zero);
    FieldGrid a = FieldGrid::at_rest(p), b = a;
    Matrix s(8, 60);
    s(2, 30) = 9.0;
    s(2, 31) = 8.0;
    s(6, 10) = 7.0;
    for (int n = 0; n < 50; ++n) {
        step_field_inplace(a, s, 1.0 / 32.0, ConvolutionMode::Serial);
        step_field_inplace(b, s, 1.0 / 32.0, ConvolutionMode::Parallel);
    }
    for (std::size_t n = 0; n < a.u.size(); ++n) CHECK(a.u.values()[n] == doctest::Approx(b.u.values()[n]).epsilon(1e-9));
}
