#include "dnsarsa/behavior.hpp"

#include <algorithm>
#include <cmath>

#include "dnsarsa/errors.hpp"

namespace dnsarsa {

void validate(const NodeCoefficients& c, double dt) {
    if (!(c.tau_int > 0.0) || !(c.tau_cos > 0.0)) throw ConfigError("node time constants must be positive");
    if (dt > std::min(c.tau_int, c.tau_cos) / 3.0 + 1e-15) throw ConfigError("dt exceeds tau/3 for behavior nodes");
    for (double g : {c.c_plus_int, c.c_minus_int, c.c_cos_int, c.c_val_int, c.c_plus_cos, c.c_int_cos,
                     c.c_input_cos, c.c_minus_cos, c.tie_bias})
        if (g < 0.0) throw ConfigError("node coupling gains must be non-negative");
}

EBSet EBSet::at_rest(std::size_t k, const NodeCoefficients& c, const SigmoidParams& s) {
    if (k == 0) throw ConfigError("behavior count must be positive");
    EBSet eb;
    eb.d_int.assign(k, c.h_node);
    eb.d_cos.assign(k, c.h_node);
    eb.d_val.assign(k, 1.0 / static_cast<double>(k));
    eb.coeffs = c;
    eb.sigmoid = s;
    return eb;
}

namespace {

int strongest_above_half(const std::vector<double>& d, const SigmoidParams& s) {
    int best = -1;
    double best_f = 0.5;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double f = sigmoid(d[i], s);
        if (f > best_f) {
            best_f = f;
            best = static_cast<int>(i);
        }
    }
    return best;
}

}  // namespace

int EBSet::active_intention() const { return strongest_above_half(d_int, sigmoid); }
int EBSet::active_cos() const { return strongest_above_half(d_cos, sigmoid); }

unsigned EBSet::cos_flags() const {
    unsigned flags = 0;
    for (std::size_t i = 0; i < d_cos.size(); ++i)
        if (f_cos(i) > 0.5) flags |= 1u << i;
    return flags;
}

bool EBSet::all_finite() const {
    auto finite = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    return finite(d_int) && finite(d_cos) && finite(d_val);
}

void step_intention_nodes(EBSet& eb, double dt) {
    const std::size_t k = eb.size();
    const NodeCoefficients& c = eb.coeffs;
    std::vector<double> f(k), fc(k);
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        f[i] = eb.f_int(i);
        fc[i] = eb.f_cos(i);
        total += f[i];
    }
    const double span = k > 1 ? static_cast<double>(k - 1) : 1.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double bias = c.tie_bias * static_cast<double>(k - 1 - i) / span;
        const double drift = -eb.d_int[i] + c.h_node + c.c_plus_int * f[i] + c.c_val_int * eb.d_val[i] -
                             c.c_minus_int * (total - f[i]) - c.c_cos_int * fc[i] + bias;
        eb.d_int[i] = euler_step_node(eb.d_int[i], drift, c.tau_int, dt);
    }
}

void step_cos_nodes(EBSet& eb, std::span<const double> cos_field_input, double dt) {
    const std::size_t k = eb.size();
    if (cos_field_input.size() != k) throw ConfigError("CoS input size does not match behavior count");
    const NodeCoefficients& c = eb.coeffs;
    std::vector<double> fi(k), fc(k);
    double total_i = 0.0, total_c = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        fi[i] = eb.f_int(i);
        fc[i] = eb.f_cos(i);
        total_i += fi[i];
        total_c += fc[i];
    }
    for (std::size_t i = 0; i < k; ++i) {
        const double drift = -eb.d_cos[i] + c.h_node + c.c_plus_cos * fc[i] - c.c_int_cos * (total_i - fi[i]) -
                             c.c_minus_cos * (total_c - fc[i]) + c.c_input_cos * cos_field_input[i];
        eb.d_cos[i] = euler_step_node(eb.d_cos[i], drift, c.tau_cos, dt);
    }
}

void read_value_nodes(EBSet& eb, const Matrix& w, std::span<const double> noise, const ValueReadout& opts) {
    const std::size_t k = eb.size();
    if (w.rows() != k || w.cols() != k) throw ConfigError("weight matrix does not match behavior count");
    if (!noise.empty() && noise.size() != k) throw ConfigError("noise vector does not match behavior count");

    std::vector<double> fc(k);
    for (std::size_t j = 0; j < k; ++j) fc[j] = eb.f_cos(j);

    std::vector<double> raw(k, 0.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        double r = 0.0;
        for (std::size_t j = 0; j < k; ++j) r += fc[j] * w(i, j);
        if (!noise.empty()) r += noise[i];
        if (opts.mask_completed) r *= 1.0 - fc[i];
        raw[i] = std::max(r, 0.0);
        sum += raw[i];
    }
    if (sum < opts.epsilon) {
        std::fill(eb.d_val.begin(), eb.d_val.end(), 1.0 / static_cast<double>(k));
        return;
    }
    for (std::size_t i = 0; i < k; ++i) eb.d_val[i] = raw[i] / sum;
}

}  // namespace dnsarsa
