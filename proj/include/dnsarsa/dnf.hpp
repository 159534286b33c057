#pragma once

#include <array>
#include <cstddef>

#include "dnsarsa/matrix.hpp"

namespace dnsarsa {

/// Soft ramp output nonlinearity, 0.5 * (1 + b(x-m) / (1 + b|x-m|)).
/// Bounded in (0, 1), equal to 0.5 at x = mu.
struct SigmoidParams {
    double beta = 4.0;
    double mu = 0.0;
};

double sigmoid(double x, const SigmoidParams& p) noexcept;

/// Mexican-hat interaction: local Gaussian excitation, broader Gaussian
/// inhibition and a constant global inhibition. Widths are in metric units
/// of the field axes (see FieldParams::dx).
struct KernelParams {
    double amp_exc = 0.0;
    double sigma_exc = 1.0;
    double amp_inh = 0.0;
    double sigma_inh = 2.0;
    double amp_global = 0.0;
};

double kernel_weight(double delta_x, const KernelParams& k) noexcept;

/// Throws ConfigError unless widths are positive, amplitudes non-negative
/// and sigma_inh > sigma_exc.
void validate(const KernelParams& k);

enum class Boundary { Zero, Circular };

struct FieldParams {
    double tau = 0.2;
    double h = -5.0;
    KernelParams kernel;
    SigmoidParams sigmoid;
    std::size_t rows = 1;  ///< 1 for one-dimensional fields
    std::size_t cols = 1;
    std::array<double, 2> dx{1.0, 1.0};  ///< metric spacing per axis (rows, cols)
    std::array<Boundary, 2> boundary{Boundary::Zero, Boundary::Zero};
};

void validate(const FieldParams& p);

/// Activation of an Amari field on a regular 1D or 2D grid.
struct FieldGrid {
    Matrix u;
    FieldParams params;

    /// Field at its resting level.
    static FieldGrid at_rest(const FieldParams& p);

    Matrix output() const;  ///< sigmoid(u) per cell
    double max_activation() const;
};

/// Which lateral-interaction implementation step_field uses.
enum class ConvolutionMode { Serial, Parallel };

/// One forward-Euler step of tau du/dt = -u + h + S + sum_x' w(x - x') f(u(x')).
/// Throws ConfigError on shape mismatch or dt > tau/3.
FieldGrid step_field(const FieldGrid& f, const Matrix& input, double dt,
                     ConvolutionMode mode = ConvolutionMode::Parallel);

/// In-place variant used by the simulation loop; avoids reallocating the grid.
void step_field_inplace(FieldGrid& f, const Matrix& input, double dt,
                        ConvolutionMode mode = ConvolutionMode::Parallel);

/// x + (dt / tau) * rhs. Shared integrator for every node equation.
inline double euler_step_node(double x, double rhs, double tau, double dt) noexcept {
    return x + (dt / tau) * rhs;
}

}  // namespace dnsarsa
