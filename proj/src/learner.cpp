#include "dnsarsa/learner.hpp"

#include <algorithm>
#include <cmath>

#include "dnsarsa/errors.hpp"

namespace dnsarsa {

void validate(const LearnerParams& p, double dt) {
    for (double tau : {p.tau_tp, p.tau_u, p.tau_o, p.tau_v}) {
        if (!(tau > 0.0)) throw ConfigError("learner time constants must be positive");
        if (dt > tau / 3.0 + 1e-15) throw ConfigError("dt exceeds tau/3 in the learner");
    }
    if (p.sa_gain < 0.0 || p.alpha_et < 0.0 || p.beta_et < 0.0 || p.alpha_w < 0.0)
        throw ConfigError("learner gains must be non-negative");
    if (p.gamma < 0.0 || p.gamma > 1.0) throw ConfigError("discount must be in [0, 1]");
    if (p.vo_threshold < 0.0) throw ConfigError("value-opposition threshold must be non-negative");
    if (p.gate == WeightGate::Shunt && !(p.w_max > 0.0)) throw ConfigError("w_max must be positive");
}

LearnerState LearnerState::zeros(std::size_t k) {
    LearnerState s;
    s.sa.I = Matrix::square(k);
    s.tp.plus = Matrix::square(k);
    s.tp.minus = Matrix::square(k);
    s.et.u = Matrix::square(k);
    s.vo.O = Matrix::square(k);
    s.weights.W = Matrix::square(k);
    return s;
}

bool LearnerState::all_finite() const {
    return sa.I.all_finite() && tp.plus.all_finite() && tp.minus.all_finite() && et.u.all_finite() &&
           vo.O.all_finite() && std::isfinite(value.v) && weights.W.all_finite();
}

SAMatrix compute_sa(const EBSet& eb, const LearnerParams& p) {
    const std::size_t k = eb.size();
    std::vector<double> fi(k), fc(k);
    for (std::size_t i = 0; i < k; ++i) {
        fi[i] = eb.f_int(i);
        fc[i] = eb.f_cos(i);
    }
    SAMatrix sa{Matrix::square(k)};
    if (p.sa_form == SaForm::Gated) {
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j) {
                if (p.sa_exclude_self && i == j) continue;
                sa.I(i, j) = fi[i] * fc[j] - p.sa_threshold > 0.0 ? p.sa_gain : 0.0;
            }
        return sa;
    }
    // Printed form, kept for comparison: the prefactor sums raw activations
    // of all other intention and CoS nodes.
    double sum_int = 0.0, sum_cos = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        sum_int += eb.d_int[i];
        sum_cos += eb.d_cos[i];
    }
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            if (p.sa_exclude_self && i == j) continue;
            const double pre = (sum_int - eb.d_int[i]) * (sum_cos - eb.d_cos[j]);
            sa.I(i, j) = fi[i] * fc[j] > 0.0 ? pre : 0.0;
        }
    return sa;
}

void step_tp(TPState& tp, const SAMatrix& sa, const LearnerParams& p, double dt) {
    auto& plus = tp.plus.values();
    auto& minus = tp.minus.values();
    const auto& in = sa.I.values();
    if (p.tp_exact) {
        // With d = minus - I: d(t) = d0 e^{-s}, plus(t) = (plus0 - d0 s) e^{-s}, s = t / tau.
        const double s = dt / p.tau_tp, e = std::exp(-s);
        for (std::size_t n = 0; n < plus.size(); ++n) {
            const double d0 = minus[n] - in[n];
            plus[n] = (plus[n] - d0 * s) * e;
            minus[n] = in[n] + d0 * e;
        }
        return;
    }
    for (std::size_t n = 0; n < plus.size(); ++n) {
        const double dp = -plus[n] + in[n] - minus[n];
        const double dm = -minus[n] + in[n];
        plus[n] = euler_step_node(plus[n], dp, p.tau_tp, dt);
        minus[n] = euler_step_node(minus[n], dm, p.tau_tp, dt);
    }
}

void step_et(ETState& et, const TPState& tp, const LearnerParams& p, double dt) {
    auto& u = et.u.values();
    const auto& plus = tp.plus.values();
    double total_in = 0.0, total_u = 0.0;
    for (std::size_t n = 0; n < u.size(); ++n) {
        total_in += rectify(plus[n]);
        total_u += u[n];
    }
    std::vector<double> next(u.size());
    for (std::size_t n = 0; n < u.size(); ++n) {
        const double in = rectify(plus[n]);
        const double excite = (1.0 - u[n]) * (p.alpha_et * in + p.beta_et * u[n]);
        const double inhibit = u[n] * (p.alpha_et * (total_in - in) + p.beta_et * (total_u - u[n]));
        next[n] = std::clamp(euler_step_node(u[n], excite - inhibit, p.tau_u, dt), 0.0, 1.0);
    }
    u.swap(next);
}

void step_vo(VOState& vo, const ETState& et, const TPState& tp, const QWeights& w, const LearnerParams& p,
             double dt) {
    auto& o = vo.O.values();
    const auto& u = et.u.values();
    const auto& plus = tp.plus.values();
    const auto& wv = w.W.values();
    for (std::size_t n = 0; n < o.size(); ++n) {
        double drive = 0.0;
        if (u[n] > 0.0) {
            if (plus[n] > p.vo_threshold) drive = p.gamma * wv[n];
            else if (-plus[n] > p.vo_threshold) drive = -wv[n];
        }
        o[n] = euler_step_node(o[n], -o[n] + drive, p.tau_o, dt);
    }
}

void step_value_cell(ValueCell& vc, const VOState& vo, const LearnerParams& p, double dt) {
    vc.v = euler_step_node(vc.v, -vc.v + vo.O.sum(), p.tau_v, dt);
}

double update_weights(QWeights& w, const ETState& et, const ValueCell& v, double r, const SAMatrix& sa,
                      const LearnerParams& p, double dt) {
    auto& wv = w.W.values();
    const auto& u = et.u.values();
    const auto& in = sa.I.values();
    const double td = r + v.v;
    double moved = 0.0;
    for (std::size_t n = 0; n < wv.size(); ++n) {
        if (u[n] == 0.0) continue;
        double gate = 1.0;
        if (p.gate == WeightGate::Shunt) gate = 1.0 - wv[n] / p.w_max;
        else if (p.gate == WeightGate::Sa) gate = 1.0 - in[n];
        const double dw = dt * p.alpha_w * gate * td * u[n];
        wv[n] += dw;
        moved += std::abs(dw);
    }
    return moved;
}

double step_learner(LearnerState& s, const EBSet& eb, double r, const LearnerParams& p, double dt, bool learning) {
    s.sa = compute_sa(eb, p);
    step_tp(s.tp, s.sa, p, dt);
    step_et(s.et, s.tp, p, dt);
    step_vo(s.vo, s.et, s.tp, s.weights, p, dt);
    step_value_cell(s.value, s.vo, p, dt);
    return learning ? update_weights(s.weights, s.et, s.value, r, s.sa, p, dt) : 0.0;
}

void reset_eligibility(LearnerState& s) { s.et.u.fill(0.0); }

}  // namespace dnsarsa
