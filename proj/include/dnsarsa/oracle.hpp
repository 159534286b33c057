#pragma once

// Tabular SARSA(lambda) reference learner, the event-level view of a DN run
// it consumes, and the report that lines the two up transition by transition.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "dnsarsa/config.hpp"
#include "dnsarsa/experiment.hpp"
#include "dnsarsa/matrix.hpp"

namespace dnsarsa {

/// Q and e are indexed [state][action].
struct TabularSarsa {
    Matrix Q;
    Matrix e;
    double alpha = 0.1;
    double gamma = 0.8;
    double lambda = 0.8;
    bool replacing = false;  ///< e[s][a] = 1 instead of += 1

    static TabularSarsa make(std::size_t states, std::size_t actions, double alpha, double gamma, double lambda);
};

/// One SARSA(lambda) step; returns delta.
double sarsa_update(TabularSarsa& m, int s, int a, double r, int s2, int a2);

struct SarsaTransition {
    int s = 0;
    int a = 0;
    double r = 0.0;
    int s2 = 0;
    int a2 = 0;
    bool terminal = false;  ///< traces are cleared after this transition
    long step = 0;          ///< DN tick of the completion that ends (s, a)
    double t = 0.0;
};

using EventStream = std::vector<SarsaTransition>;

struct ReplayResult {
    std::vector<double> delta;
    std::vector<Matrix> q;  ///< Q after each transition
};

ReplayResult replay(const EventStream& events, TabularSarsa& m);

/// Transition k ends pair (s, a) = (previous CoS, completed behavior) at the
/// k-th CoS onset; a2 is the behavior completed next. The reward of an
/// episode is attached to the transition whose completion started it, scaled
/// by reward_scale. Completions after which no next behavior exists are dropped.
EventStream extract_event_stream(const RunLog& log, double reward_value, double reward_scale = 1.0,
                                 bool terminal_on_reward = true);

struct LambdaFit {
    double rho = 0.0;     ///< geometric-mean ratio of successive stored ET activations
    double lambda = 0.0;  ///< rho / gamma, kept inside (0, 1)
    std::size_t samples = 0;
};

/// Fits the trace decay from the ET snapshots taken at each transition.
LambdaFit fit_lambda(const RunLog& log, double gamma);

/// Integrated gate duration of a value-opposition pulse: TP+ of a step from
/// rest, (t / tau) exp(-t / tau), stays above `threshold` for tau * (s2 - s1)
/// where s exp(-s) = threshold at s1 < 1 < s2. Zero when threshold >= 1/e.
double vo_gate_window(double tau_tp, double threshold);

struct CompareRow {
    double t = 0.0;
    int s = 0;
    int a = 0;
    double r = 0.0;
    double delta_oracle = 0.0;
    double dw_dn = 0.0;      ///< integrated DN change of W(a, s) over the transition
    double dw_oracle = 0.0;  ///< alpha * delta * e[s][a]
    bool sign_match = false;
};

struct CompareReport {
    std::vector<CompareRow> rows;
    LambdaFit fit;
    double alpha_oracle = 0.0;
    double reward_oracle = 0.0;
    double gate_window = 0.0;
    std::size_t cells = 0;  ///< eligible cells compared
    double sign_agreement = 0.0;
    double magnitude_correlation = 0.0;
    bool degenerate = false;
    bool passed = false;
    std::string note;
};

struct CompareThresholds {
    double sign_agreement = 0.99;
    double magnitude_correlation = 0.95;
};

/// Teacher-forced comparison: before each transition the oracle's Q is set
/// to the DN weights (Q[s][a] = W(a, s)) so both see the same values, then
/// the oracle update alpha * delta * e is compared cell by cell with the DN
/// weight change over the same interval. Cells with e = 0 and the freshly
/// entered pair are skipped. Throws AlignmentError when the log's event,
/// transition and TD series disagree in length.
CompareReport compare(const RunLog& log, const ExperimentConfig& cfg, const CompareThresholds& th = {});

/// Scripted K-behavior world: intention and CoS node outputs are driven
/// directly (no perception), the next behavior is drawn uniformly among the
/// others, and the learner runs exactly as in the closed loop.
struct ScriptedWorld {
    std::size_t behaviors = 3;
    std::vector<int> target{0, 1, 2, 0};
    double execute_s = 3.0;  ///< intention on, before its CoS fires
    double handover_s = 0.25;  ///< intention off, CoS on, next intention not yet on
    double drive = 5.0;  ///< node activation when on; -drive when off
    double initial_weight_max = 0.5;  ///< W drawn uniformly from [0, max]
    std::uint64_t seed = 7;
};

RunLog run_scripted(const ScriptedWorld& world, const ExperimentConfig& cfg, std::size_t transitions);

/// run_scripted with cfg.learner and dt, then compare().
CompareReport compare_scripted(const ExperimentConfig& cfg, std::size_t transitions, const ScriptedWorld& world = {});

void write_report(std::ostream& os, const CompareReport& report);

}  // namespace dnsarsa
