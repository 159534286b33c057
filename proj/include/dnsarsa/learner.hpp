#pragma once

// Neural-dynamic SARSA(lambda) learner.
//
// Every array is K x K with row i = action (intention node) and column
// j = state (CoS node of the last completed behavior). Per tick:
//
//   state/action coincidence I  ->  transient-pulse cells TP+/TP-
//     -> Item-and-Order working memory u (eligibility trace)
//     -> value-opposition field O -> value cell v
//     -> Q-weights W, dW/dt = alpha_w * gate * (r + v) * u
//
// While pair (s,a) hands over to (s',a'), TP+ is positive on the new pair
// and negative on the old one, so O sums to gamma W(s',a') - W(s,a) and
// r + v is the TD error.

#include <cstddef>

#include "dnsarsa/behavior.hpp"
#include "dnsarsa/matrix.hpp"

namespace dnsarsa {

enum class SaForm {
    Gated,    ///< I = g * H(f(int_i) f(cos_j) - theta)
    Printed,  ///< I = [sum_{k!=i} sum_{l!=j} d_k^int d_l^cos] * H(f(int_i) f(cos_j))
};

enum class WeightGate {
    None,   ///< gate = 1
    Shunt,  ///< gate = 1 - W / w_max
    Sa,     ///< gate = 1 - I
};

struct LearnerParams {
    SaForm sa_form = SaForm::Gated;
    double sa_gain = 1.0;
    double sa_threshold = 0.25;
    /// Drop diagonal (j, j) coincidences. An intention cannot be re-selected
    /// while its own CoS holds, so I(j, j) only ever fires during the
    /// hand-over at the end of behavior j, not for a real transition.
    bool sa_exclude_self = true;

    double tau_tp = 0.5;
    /// TP cells are linear, so a step with the input held over dt can be
    /// taken exactly. Forward Euler at dt = tau / 16 overshoots the onset
    /// peak by ~3%.
    bool tp_exact = true;

    double alpha_et = 1.1;
    double beta_et = 0.8;
    double tau_u = 0.5;

    double tau_o = 0.1;
    double gamma = 0.8;
    /// TP+ must exceed this magnitude to open a value-opposition gate.
    double vo_threshold = 0.05;

    double tau_v = 0.2;

    double alpha_w = 0.05;  ///< 1/s
    /// Sa keeps the pair that is currently active out of the update. Without
    /// it the freshly entered pair charges its trace inside the VO window and
    /// absorbs the TD error meant for its predecessor.
    WeightGate gate = WeightGate::Sa;
    double w_max = 2.0;
};

void validate(const LearnerParams& p, double dt);

struct SAMatrix {
    Matrix I;
};

struct TPState {
    Matrix plus;
    Matrix minus;
};

struct ETState {
    Matrix u;
};

struct VOState {
    Matrix O;
};

struct ValueCell {
    double v = 0.0;
};

struct QWeights {
    Matrix W;
};

struct LearnerState {
    SAMatrix sa;
    TPState tp;
    ETState et;
    VOState vo;
    ValueCell value;
    QWeights weights;

    static LearnerState zeros(std::size_t k);
    std::size_t size() const noexcept { return weights.W.rows(); }
    bool all_finite() const;
};

SAMatrix compute_sa(const EBSet& eb, const LearnerParams& p);

void step_tp(TPState& tp, const SAMatrix& sa, const LearnerParams& p, double dt);

/// Rectified TP+ input to the working memory (onsets write, offsets do not erase).
inline double rectify(double x) noexcept { return x > 0.0 ? x : 0.0; }

/// Shunting on-centre off-surround step; u is kept inside [0, 1].
void step_et(ETState& et, const TPState& tp, const LearnerParams& p, double dt);

void step_vo(VOState& vo, const ETState& et, const TPState& tp, const QWeights& w, const LearnerParams& p,
             double dt);

void step_value_cell(ValueCell& vc, const VOState& vo, const LearnerParams& p, double dt);

/// Returns sum |dW| applied this step.
double update_weights(QWeights& w, const ETState& et, const ValueCell& v, double r, const SAMatrix& sa,
                      const LearnerParams& p, double dt);

/// compute_sa -> step_tp -> step_et -> step_vo -> step_value_cell ->
/// update_weights. Returns sum |dW|. learning = false freezes W.
double step_learner(LearnerState& s, const EBSet& eb, double r, const LearnerParams& p, double dt,
                    bool learning = true);

/// Clears the eligibility trace (end of a reward episode).
void reset_eligibility(LearnerState& s);

}  // namespace dnsarsa
