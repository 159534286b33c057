// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any of them fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dnsarsa/behavior.hpp"
#include "dnsarsa/config.hpp"
#include "dnsarsa/events.hpp"
#include "dnsarsa/experiment.hpp"
#include "dnsarsa/learner.hpp"
#include "dnsarsa/oracle.hpp"
#include "dnsarsa/weights_io.hpp"

using namespace dnsarsa;

namespace {

constexpr double kDt = 1.0 / 32.0;
int g_failed = 0;

void report(int n, bool ok, const std::string& name, const std::string& detail) {
    std::printf("criterion %d %s  %s: %s\n", n, ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failed;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

EBSet rest_eb(std::size_t k) { return EBSet::at_rest(k, NodeCoefficients{}, SigmoidParams{}); }

void drive(EBSet& eb, int intention, int cos) {
    for (std::size_t i = 0; i < eb.size(); ++i) {
        eb.d_int[i] = static_cast<int>(i) == intention ? 5.0 : -5.0;
        eb.d_cos[i] = static_cast<int>(i) == cos ? 5.0 : -5.0;
    }
}

void hold(LearnerState& ls, const EBSet& eb, const LearnerParams& p, double seconds) {
    const long n = std::lround(seconds / kDt);
    for (long i = 0; i < n; ++i) step_learner(ls, eb, 0.0, p, kDt);
}

// ---------------------------------------------------------------------------

void tp_analytics() {
    const auto t0 = std::chrono::steady_clock::now();
    const LearnerParams p;
    const double i0 = 1.0, tau = p.tau_tp;

    TPState tp{Matrix::square(1), Matrix::square(1)};
    SAMatrix on{Matrix::square(1, i0)};
    std::vector<double> plus;
    for (int n = 0; n < static_cast<int>(8.0 * tau / kDt); ++n) {
        step_tp(tp, on, p, kDt);
        plus.push_back(tp.plus(0, 0));
    }
    // Sub-sample peak by a parabola through the largest sample and its neighbours.
    const auto it = std::max_element(plus.begin(), plus.end());
    const std::size_t m = static_cast<std::size_t>(it - plus.begin());
    double t_peak = static_cast<double>(m + 1) * kDt, peak = *it;
    if (m > 0 && m + 1 < plus.size()) {
        const double a = plus[m - 1], b = plus[m], c = plus[m + 1];
        const double off = 0.5 * (a - c) / (a - 2.0 * b + c);
        t_peak += off * kDt;
        peak = b - 0.25 * (a - c) * off;
    }

    SAMatrix off_in{Matrix::square(1)};
    double low = 0.0;
    for (int n = 0; n < static_cast<int>(8.0 * tau / kDt); ++n) {
        step_tp(tp, off_in, p, kDt);
        low = std::min(low, tp.plus(0, 0));
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const bool peak_ok = std::abs(t_peak - tau) <= 0.01 * tau && std::abs(peak - i0 / std::numbers::e) <= 0.01 * i0 / std::numbers::e;
    const bool offset_ok = std::abs(low + i0) <= 0.02 * i0;
    report(1, peak_ok && offset_ok && secs < 1.0, "TP-cell analytics",
           fmt("onset peak %.4f at t=%.4f s (want %.4f at %.3f s) %s; offset minimum %.4f (want %.3f +-2%%) %s; %.3f s",
               peak, t_peak, i0 / std::numbers::e, tau, peak_ok ? "ok" : "off", low, -i0,
               offset_ok ? "ok" : "off, the pulse pair is antisymmetric so the offset minimum is -I0/e", secs));
}

void vo_equilibrium() {
    LearnerParams p;
    p.alpha_w = 0.0;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> w(0.0, 1.5);
    double worst = 0.0;
    const int cases = 50;
    for (int c = 0; c < cases; ++c) {
        const int k = 4;
        std::vector<int> b{0, 1, 2, 3};
        std::shuffle(b.begin(), b.end(), rng);
        LearnerState ls = LearnerState::zeros(k);
        for (double& x : ls.weights.W.values()) x = w(rng);
        const double w_sa = ls.weights.W(b[1], b[0]);   // (s, a) = (b0, b1)
        const double w_s2a2 = ls.weights.W(b[2], b[1]);  // (s', a') = (b1, b2)
        EBSet eb = rest_eb(k);
        drive(eb, b[1], b[0]);
        hold(ls, eb, p, 3.0);
        drive(eb, b[2], b[1]);
        hold(ls, eb, p, 0.5);
        const double want = p.gamma * w_s2a2 - w_sa;
        const double scale = std::max({std::abs(want), std::abs(w_sa), p.gamma * std::abs(w_s2a2)});
        worst = std::max(worst, std::abs(ls.vo.O.sum() - want) / scale);
    }
    report(2, worst <= 0.02, "VO equilibrium",
           fmt("%d random transitions, worst |sum O - (gamma W' - W)| = %.2f%% of the value scale", cases, 100.0 * worst));
}

void recency() {
    const LearnerParams p;
    std::mt19937_64 rng(99);
    int bad_order = 0, out_of_range = 0;
    const int reps = 200, k = 6;
    for (int rep = 0; rep < reps; ++rep) {
        const int len = 2 + static_cast<int>(rng() % 4);
        std::vector<int> order(k);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<int> seq(order.begin(), order.begin() + len + 1);
        LearnerState ls = LearnerState::zeros(k);
        EBSet eb = rest_eb(k);
        int held = -1;
        for (int b : seq) {
            drive(eb, b, held);
            hold(ls, eb, p, 3.0);
            drive(eb, -1, b);
            hold(ls, eb, p, 0.25);
            held = b;
        }
        std::vector<double> u;
        for (int n = 1; n <= len; ++n) u.push_back(ls.et.u(seq[n], seq[n - 1]));
        bool ok = u.front() > 0.0;
        for (int n = 1; n < len; ++n) ok = ok && u[n] > u[n - 1];
        if (!ok) ++bad_order;
        for (double x : ls.et.u.values())
            if (x < 0.0 || x > 1.0) ++out_of_range;
    }
    report(3, bad_order == 0 && out_of_range == 0, "recency gradient",
           fmt("%d random sequences of 2-5 transitions: %d out of order, %d activations outside [0,1]", reps, bad_order,
               out_of_range));
}

void wta_segmentation(const BatchResult& batch) {
    const long window = static_cast<long>(std::floor(0.3 / kDt + 1e-9));
    long overlaps = 0, long_overlaps = 0, overlapping_events = 0, mismatched = 0, runs = 0;
    for (const SeedOutcome& o : batch.runs) {
        if (!o.log) continue;
        ++runs;
        const RunLog& l = *o.log;
        for (const auto& [start, len] : l.wta_overlaps) {
            ++overlaps;
            if (len > window) ++long_overlaps;
        }
        if (!l.trace) {
            ++mismatched;
            continue;
        }
        std::vector<BehaviorEvent> ev;
        try {
            ev = extract_events(*l.trace);
        } catch (const std::exception&) {
            ++overlapping_events;
            continue;
        }
        for (std::size_t n = 1; n < ev.size(); ++n)
            if (ev[n].t_on < ev[n - 1].t_off) ++overlapping_events;
        std::size_t completed = 0;
        for (const BehaviorEvent& e : ev) {
            if (e.completed()) ++completed;
            if (e.completed() && (e.cos_time < e.t_on || e.cos_time > e.t_off)) ++overlapping_events;
        }
        if (ev.size() != l.events.size() || completed != l.transitions.size()) ++mismatched;
    }
    const bool ok = runs == static_cast<long>(batch.runs.size()) && long_overlaps == 0 && overlapping_events == 0 &&
                    mismatched == 0;
    report(4, ok, "WTA and segmentation",
           fmt("%ld full runs: %ld multi-intention episodes, %ld longer than 0.3 s; %ld overlapping events; "
               "%ld runs where offline and online segmentation disagree",
               runs, overlaps, long_overlaps, overlapping_events, mismatched));
}

void oracle_consistency() {
    ExperimentConfig cfg;
    const CompareReport r = compare_scripted(cfg, 200);
    report(5, r.passed && r.sign_agreement >= 0.99 && r.magnitude_correlation >= 0.95, "oracle consistency",
           fmt("200 scripted transitions, lambda-hat %.3f: sign agreement %.4f over %zu cells, magnitude correlation %.4f",
               r.fit.lambda, r.sign_agreement, r.cells, r.magnitude_correlation));
}

long tail_start(const RunLog& l) {
    const long n = static_cast<long>(l.steps.size());
    return l.exploration_steps + 3 * (n - l.exploration_steps) / 4;
}

bool discovered_exploring(const RunLog& l) { return l.discovery_step && *l.discovery_step < l.exploration_steps; }

void end_to_end(const BatchResult& batch) {
    int discovered = 0, converged = 0, ran = 0;
    std::size_t lo = 1u << 30, hi = 0, sum = 0;
    std::string detail;
    for (const SeedOutcome& o : batch.runs) {
        if (!o.log) continue;
        ++ran;
        const RunLog& l = *o.log;
        const std::size_t b = l.completed_before(l.exploration_steps);
        lo = std::min(lo, b);
        hi = std::max(hi, b);
        sum += b;
        if (discovered_exploring(l)) {
            ++discovered;
            if (follows_target(l, tail_start(l))) ++converged;
            else detail += fmt(" seed %llu discovered but did not converge;", static_cast<unsigned long long>(o.seed));
        }
    }
    const bool behaviors_ok = ran > 0 && lo >= 150 && hi <= 450;
    const bool ok = ran == 13 && discovered >= 10 && converged == discovered && behaviors_ok;
    report(6, ok, "end-to-end learning",
           fmt("%d/13 runs completed, %d discovered the sequence while exploring, %d/%d of those converged; "
               "exploration behaviors %zu..%zu (mean %.0f, want 300 +-150)",
               ran, discovered, converged, discovered, lo, hi, ran ? static_cast<double>(sum) / ran : 0.0) +
               detail);
}

void td_trend(const BatchResult& batch) {
    int n = 0, below = 0;
    double worst = 0.0;
    std::string seeds;
    for (const SeedOutcome& o : batch.runs) {
        if (!o.log || !discovered_exploring(*o.log)) continue;
        const RunLog& l = *o.log;
        const double expl = mean_abs_transition_td(l, 0, l.exploration_steps);
        const double late = mean_abs_transition_td(l, tail_start(l), static_cast<long>(l.steps.size()));
        const double ratio = expl > 0.0 ? late / expl : INFINITY;
        ++n;
        if (ratio < 0.25) ++below;
        worst = std::max(worst, ratio);
        seeds += fmt(" %llu:%.4f/%.4f", static_cast<unsigned long long>(o.seed), late, expl);
    }
    report(8, n > 0 && below == n, "TD-error trend",
           fmt("%d/%d learning runs have final-quartile mean |TD| < 25%% of the exploration mean (worst ratio %.1f); "
               "final/exploration per seed:",
               below, n, worst) +
               seeds);
}

const RunLog* converged_run(const BatchResult& batch) {
    for (const SeedOutcome& o : batch.runs)
        if (o.log && discovered_exploring(*o.log) && follows_target(*o.log, tail_start(*o.log))) return &*o.log;
    return nullptr;
}

void shortcut_unlearning(const BatchResult& batch) {
    const RunLog* src = converged_run(batch);
    if (!src) {
        report(7, false, "shortcut unlearning", "no converged run to take a learned chain from");
        return;
    }
    ExperimentConfig cfg;
    const int R = color_index(cfg, "R"), B = color_index(cfg, "B"), Y = color_index(cfg, "Y");
    Matrix w = src->final_weights;
    const double chain = w(Y, B);
    w(R, B) = chain + 0.5;  // B -> R skips Y
    cfg.initial_weights = w;
    cfg.seed = 4242;
    cfg.exploration_steps = 0;
    cfg.total_steps = 40000;
    const RunLog l = run_experiment(cfg);

    // One episode per visit of state B: the shortcut value is read each time
    // B completes, until B is followed by Y for the first time.
    std::vector<double> shortcut;
    long first_target = -1;
    for (std::size_t k = 0; k < l.transitions.size(); ++k) {
        const TransitionRecord& tr = l.transitions[k];
        if (tr.previous == B && tr.completed == Y) {
            first_target = tr.step;
            shortcut.push_back(tr.W(R, B));
            break;
        }
        if (tr.completed == B) shortcut.push_back(tr.W(R, B));
    }
    bool monotone = shortcut.size() >= 2;
    for (std::size_t n = 1; n < shortcut.size(); ++n) monotone = monotone && shortcut[n] < shortcut[n - 1];
    // Converged in the same sense as the end-to-end runs: the final quartile
    // follows the target. Shortcuts taken after the first B->Y are reported.
    long late_shortcuts = 0, last_shortcut = -1;
    for (const TransitionRecord& tr : l.transitions)
        if (first_target >= 0 && tr.step > first_target && tr.previous == B && tr.completed == R) {
            ++late_shortcuts;
            last_shortcut = tr.step;
        }
    const bool settled = first_target >= 0 && follows_target(l, tail_start(l));
    std::string trail;
    for (std::size_t n = 0; n < shortcut.size() && n < 8; ++n) trail += fmt(" %.3f", shortcut[n]);
    if (shortcut.size() > 8) trail += " ...";
    report(7, monotone && settled, "shortcut unlearning",
           fmt("B->R seeded at %.3f over B->Y %.3f; %zu episodes until B->Y (W(R,B):%s); then %ld more shortcuts "
               "while the two values are close, the last at step %ld of %ld; final quartile %s the target",
               chain + 0.5, chain, shortcut.size(), trail.c_str(), late_shortcuts, last_shortcut, cfg.total_steps,
               settled ? "follows" : "does not follow"));
}

void transfer(const BatchResult& batch) {
    const RunLog* src = converged_run(batch);
    if (!src) {
        report(9, false, "transfer", "no converged run to take weights from");
        return;
    }
    const auto path = std::filesystem::temp_directory_path() / "dnsarsa_acceptance_weights.txt";
    save_weights(src->final_weights, path.string());
    ExperimentConfig cfg;
    cfg.initial_weights = load_weights(path.string(), cfg.behaviors);
    std::filesystem::remove(path);
    cfg.seed = 777001;
    cfg.exploration_steps = 0;
    cfg.total_steps = 10000;
    cfg.learning = false;
    const RunLog l = run_experiment(cfg);

    std::vector<int> done;
    for (const TransitionRecord& tr : l.transitions) done.push_back(tr.completed);
    const std::vector<int>& t = l.target;
    std::size_t full = 0;
    for (std::size_t n = 0; n + t.size() <= done.size(); ++n)
        if (std::equal(t.begin(), t.end(), done.begin() + static_cast<long>(n))) ++full;
    const bool frozen = l.final_weights.values() == cfg.initial_weights->values();
    report(9, full >= 2 && frozen, "transfer",
           fmt("weights of seed %llu replayed on a fresh layout (seed %llu) with learning off: %zu full target "
               "sequences, %ld reward episodes, weights %s",
               static_cast<unsigned long long>(src->seed), static_cast<unsigned long long>(cfg.seed), full,
               l.reward_episodes, frozen ? "unchanged" : "changed"));
}

}  // namespace

int main() {
    tp_analytics();
    vo_equilibrium();
    recency();
    oracle_consistency();

    ExperimentConfig cfg;
    cfg.seed = 1;
    cfg.record_trace = true;
    const auto t0 = std::chrono::steady_clock::now();
    const BatchResult batch = run_batch(cfg, 13, Execution::Parallel);
    std::printf("# batch of 13 x %ld steps took %.0f s\n", cfg.total_steps,
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());

    wta_segmentation(batch);
    end_to_end(batch);
    shortcut_unlearning(batch);
    td_trend(batch);
    transfer(batch);

    std::printf("%d criteria failed\n", g_failed);
    return g_failed == 0 ? 0 : 1;
}
