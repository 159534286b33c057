#pragma once

// Elementary behaviors: one intention node, one condition-of-satisfaction
// (CoS) node and one value node per behavior. Intention nodes compete in a
// winner-take-all regime biased by the value nodes; a CoS node switches on
// when its behavior's goal is perceived, shuts its intention down and holds
// the "last completed behavior" until the next CoS node replaces it.

#include <cstddef>
#include <span>
#include <vector>

#include "dnsarsa/dnf.hpp"
#include "dnsarsa/matrix.hpp"

namespace dnsarsa {

struct NodeCoefficients {
    double tau_int = 0.3;
    double tau_cos = 0.3;
    double h_node = -5.0;
    double c_plus_int = 10.0;   ///< intention self-excitation
    double c_minus_int = 20.0;  ///< lateral inhibition between intentions
    double c_cos_int = 5.0;     ///< own CoS -> intention inhibition
    double c_val_int = 20.0;    ///< value node -> intention gain
    double c_plus_cos = 10.0;   ///< CoS self-excitation
    double c_int_cos = 2.0;     ///< other intentions -> CoS inhibition
    double c_input_cos = 5.0;   ///< CoS field -> CoS node gain
    double c_minus_cos = 10.0;  ///< lateral inhibition between CoS nodes
    /// Input bias tie_bias * (K-1-i)/(K-1): resolves exact value ties in
    /// favour of the lowest behavior index.
    double tie_bias = 0.01;
};

void validate(const NodeCoefficients& c, double dt);

struct EBSet {
    std::vector<double> d_int;
    std::vector<double> d_cos;
    std::vector<double> d_val;
    NodeCoefficients coeffs;
    SigmoidParams sigmoid;

    /// All nodes at the resting level, value nodes uniform.
    static EBSet at_rest(std::size_t k, const NodeCoefficients& c, const SigmoidParams& s);

    std::size_t size() const noexcept { return d_int.size(); }
    double f_int(std::size_t i) const { return dnsarsa::sigmoid(d_int[i], sigmoid); }
    double f_cos(std::size_t i) const { return dnsarsa::sigmoid(d_cos[i], sigmoid); }

    /// Index of the intention with output above 0.5, or -1. When several are
    /// above threshold the strongest is returned.
    int active_intention() const;
    int active_cos() const;
    /// Bit i set when CoS node i has output above 0.5.
    unsigned cos_flags() const;
    bool all_finite() const;
};

void step_intention_nodes(EBSet& eb, double dt);

/// cos_field_input[i]: summed supra-threshold CoS field output attributed to behavior i.
void step_cos_nodes(EBSet& eb, std::span<const double> cos_field_input, double dt);

struct ValueReadout {
    double epsilon = 1e-6;
    /// Suppress the read-out of behaviors whose own CoS node is active: raw_i
    /// is scaled by (1 - f(d_i^cos)). A completed behavior cannot be
    /// re-selected while its CoS holds, so its share would otherwise be lost.
    bool mask_completed = true;
};

/// raw_i = sum_j f(d_j^cos) W(i, j) + noise_i, clamped at 0 and divided by
/// its sum; uniform 1/K when the raw sum is below epsilon. Writes eb.d_val.
void read_value_nodes(EBSet& eb, const Matrix& w, std::span<const double> noise,
                      const ValueReadout& opts = {});

}  // namespace dnsarsa
