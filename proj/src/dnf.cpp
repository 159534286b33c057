#include "dnsarsa/dnf.hpp"

#include <algorithm>
#include <cmath>

#include "dnsarsa/convolution.hpp"
#include "dnsarsa/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dnsarsa {

double sigmoid(double x, const SigmoidParams& p) noexcept {
    const double z = p.beta * (x - p.mu);
    return 0.5 * (1.0 + z / (1.0 + std::abs(z)));
}

double kernel_weight(double delta_x, const KernelParams& k) noexcept {
    const double d2 = delta_x * delta_x;
    return k.amp_exc * std::exp(-d2 / (2.0 * k.sigma_exc * k.sigma_exc)) -
           k.amp_inh * std::exp(-d2 / (2.0 * k.sigma_inh * k.sigma_inh)) - k.amp_global;
}

void validate(const KernelParams& k) {
    if (!(k.sigma_exc > 0.0) || !(k.sigma_inh > 0.0))
        throw ConfigError("kernel widths must be positive");
    if (!(k.sigma_inh > k.sigma_exc))
        throw ConfigError("kernel inhibition must be broader than excitation");
    if (k.amp_exc < 0.0 || k.amp_inh < 0.0 || k.amp_global < 0.0)
        throw ConfigError("kernel amplitudes must be non-negative");
}

void validate(const FieldParams& p) {
    if (!(p.tau > 0.0)) throw ConfigError("field tau must be positive");
    if (!(p.h < 0.0)) throw ConfigError("field resting level must be negative");
    if (!(p.sigmoid.beta > 0.0)) throw ConfigError("sigmoid beta must be positive");
    if (p.rows == 0 || p.cols == 0) throw ConfigError("field grid must be non-empty");
    if (!(p.dx[0] > 0.0) || !(p.dx[1] > 0.0)) throw ConfigError("field spacing must be positive");
    validate(p.kernel);
}

FieldGrid FieldGrid::at_rest(const FieldParams& p) {
    validate(p);
    return FieldGrid{Matrix(p.rows, p.cols, p.h), p};
}

Matrix FieldGrid::output() const {
    Matrix out(u.rows(), u.cols());
    const auto& src = u.values();
    auto& dst = out.values();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = sigmoid(src[i], params.sigmoid);
    return out;
}

double FieldGrid::max_activation() const {
    const auto& v = u.values();
    return v.empty() ? params.h : *std::max_element(v.begin(), v.end());
}

void step_field_inplace(FieldGrid& f, const Matrix& input, double dt, ConvolutionMode mode) {
    if (!input.same_shape(f.u)) throw ConfigError("field input shape does not match field grid");
    if (dt > f.params.tau / 3.0 + 1e-15) throw ConfigError("dt exceeds tau/3 for field");

    const Matrix out = f.output();
    const Matrix lateral =
        mode == ConvolutionMode::Serial ? lateral_serial(out, f.params) : lateral_parallel(out, f.params);

    auto& u = f.u.values();
    const auto& s = input.values();
    const auto& l = lateral.values();
    const double h = f.params.h;
    for (std::size_t i = 0; i < u.size(); ++i)
        u[i] = euler_step_node(u[i], -u[i] + h + s[i] + l[i], f.params.tau, dt);
}

FieldGrid step_field(const FieldGrid& f, const Matrix& input, double dt, ConvolutionMode mode) {
    FieldGrid next = f;
    step_field_inplace(next, input, dt, mode);
    return next;
}

// ---------------------------------------------------------------------------
// lateral interaction

std::size_t kernel_radius(const FieldParams& p, int axis) {
    const std::size_t n = axis == 0 ? p.rows : p.cols;
    if (n <= 1) return 0;
    const auto r = static_cast<std::size_t>(std::ceil(3.0 * p.kernel.sigma_inh / p.dx[axis]));
    const std::size_t cap = p.boundary[axis] == Boundary::Circular ? (n - 1) / 2 : n - 1;
    return std::min(r, cap);
}

namespace {

// Neighbour index along one axis, or -1 when it falls off a zero-padded edge.
inline long neighbour(long i, long d, long n, Boundary b) {
    long j = i + d;
    if (b == Boundary::Circular) {
        j %= n;
        if (j < 0) j += n;
        return j;
    }
    return (j < 0 || j >= n) ? -1 : j;
}

std::vector<double> gaussian_taps(std::size_t radius, double dx, double sigma) {
    std::vector<double> g(2 * radius + 1);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double d = (static_cast<double>(k) - static_cast<double>(radius)) * dx;
        g[k] = std::exp(-d * d / (2.0 * sigma * sigma));
    }
    return g;
}

}  // namespace

Matrix lateral_serial(const Matrix& out, const FieldParams& p) {
    const long nr = static_cast<long>(out.rows());
    const long nc = static_cast<long>(out.cols());
    const long rr = static_cast<long>(kernel_radius(p, 0));
    const long rc = static_cast<long>(kernel_radius(p, 1));
    const KernelParams& k = p.kernel;
    const double global = k.amp_global * out.sum();

    Matrix res(out.rows(), out.cols());
    for (long r = 0; r < nr; ++r) {
        for (long c = 0; c < nc; ++c) {
            double acc = 0.0;
            for (long dr = -rr; dr <= rr; ++dr) {
                const long r2 = neighbour(r, dr, nr, p.boundary[0]);
                if (r2 < 0) continue;
                for (long dc = -rc; dc <= rc; ++dc) {
                    const long c2 = neighbour(c, dc, nc, p.boundary[1]);
                    if (c2 < 0) continue;
                    const double yr = static_cast<double>(dr) * p.dx[0];
                    const double yc = static_cast<double>(dc) * p.dx[1];
                    const double d2 = yr * yr + yc * yc;
                    const double w = k.amp_exc * std::exp(-d2 / (2.0 * k.sigma_exc * k.sigma_exc)) -
                                     k.amp_inh * std::exp(-d2 / (2.0 * k.sigma_inh * k.sigma_inh));
                    acc += w * out(static_cast<std::size_t>(r2), static_cast<std::size_t>(c2));
                }
            }
            res(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = acc - global;
        }
    }
    return res;
}

Matrix lateral_parallel(const Matrix& out, const FieldParams& p) {
    const long nr = static_cast<long>(out.rows());
    const long nc = static_cast<long>(out.cols());
    const long rr = static_cast<long>(kernel_radius(p, 0));
    const long rc = static_cast<long>(kernel_radius(p, 1));
    const KernelParams& k = p.kernel;
    const double global = k.amp_global * out.sum();
    const bool big = out.size() >= kParallelCellThreshold;

    const auto ge_r = gaussian_taps(static_cast<std::size_t>(rr), p.dx[0], k.sigma_exc);
    const auto gi_r = gaussian_taps(static_cast<std::size_t>(rr), p.dx[0], k.sigma_inh);
    const auto ge_c = gaussian_taps(static_cast<std::size_t>(rc), p.dx[1], k.sigma_exc);
    const auto gi_c = gaussian_taps(static_cast<std::size_t>(rc), p.dx[1], k.sigma_inh);

    // Pass 1: along columns, within each row.
    Matrix exc(out.rows(), out.cols());
    Matrix inh(out.rows(), out.cols());
#pragma omp parallel for if (big) schedule(static)
    for (long r = 0; r < nr; ++r) {
        for (long c = 0; c < nc; ++c) {
            double se = 0.0, si = 0.0;
            for (long dc = -rc; dc <= rc; ++dc) {
                const long c2 = neighbour(c, dc, nc, p.boundary[1]);
                if (c2 < 0) continue;
                const double v = out(static_cast<std::size_t>(r), static_cast<std::size_t>(c2));
                se += ge_c[static_cast<std::size_t>(dc + rc)] * v;
                si += gi_c[static_cast<std::size_t>(dc + rc)] * v;
            }
            exc(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = se;
            inh(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = si;
        }
    }

    // Pass 2: along rows.
    Matrix res(out.rows(), out.cols());
#pragma omp parallel for if (big) schedule(static)
    for (long r = 0; r < nr; ++r) {
        for (long c = 0; c < nc; ++c) {
            double se = 0.0, si = 0.0;
            for (long dr = -rr; dr <= rr; ++dr) {
                const long r2 = neighbour(r, dr, nr, p.boundary[0]);
                if (r2 < 0) continue;
                se += ge_r[static_cast<std::size_t>(dr + rr)] * exc(static_cast<std::size_t>(r2), static_cast<std::size_t>(c));
                si += gi_r[static_cast<std::size_t>(dr + rr)] * inh(static_cast<std::size_t>(r2), static_cast<std::size_t>(c));
            }
            res(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = k.amp_exc * se - k.amp_inh * si - global;
        }
    }
    return res;
}

}  // namespace dnsarsa
