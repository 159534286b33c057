#pragma once

// Lateral interaction kernels for Amari fields.
//
// lateral_serial is the reference: a direct double loop over every pair of
// cells inside the truncation window, evaluating the full 2D kernel. It is
// slow and kept for tests and the benchmark. lateral_parallel computes the
// same sum through separable 1D Gaussian passes, OpenMP-parallel over rows
// and columns once the grid is large enough to pay for the fork.

#include <cstddef>

#include "dnsarsa/dnf.hpp"
#include "dnsarsa/matrix.hpp"

namespace dnsarsa {

/// Half-width, in cells, of the truncated kernel along one axis:
/// ceil(3 * sigma_inh / dx), capped so a circular axis is not visited twice.
std::size_t kernel_radius(const FieldParams& p, int axis);

/// Interaction input sum_x' w(x - x') out(x') for every cell.
Matrix lateral_serial(const Matrix& out, const FieldParams& p);
Matrix lateral_parallel(const Matrix& out, const FieldParams& p);

/// Grids with fewer cells than this run the parallel kernel on one thread.
inline constexpr std::size_t kParallelCellThreshold = 4096;

}  // namespace dnsarsa
