#include "dnsarsa/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "dnsarsa/errors.hpp"
#include "dnsarsa/events.hpp"
#include "dnsarsa/learner.hpp"

namespace dnsarsa {

TabularSarsa TabularSarsa::make(std::size_t states, std::size_t actions, double alpha, double gamma, double lambda) {
    TabularSarsa m;
    m.Q = Matrix(states, actions, 0.0);
    m.e = Matrix(states, actions, 0.0);
    m.alpha = alpha;
    m.gamma = gamma;
    m.lambda = lambda;
    return m;
}

double sarsa_update(TabularSarsa& m, int s, int a, double r, int s2, int a2) {
    const auto si = static_cast<std::size_t>(s), ai = static_cast<std::size_t>(a);
    const double delta = r + m.gamma * m.Q(static_cast<std::size_t>(s2), static_cast<std::size_t>(a2)) - m.Q(si, ai);
    if (m.replacing) m.e(si, ai) = 1.0;
    else m.e(si, ai) += 1.0;
    auto& q = m.Q.values();
    auto& e = m.e.values();
    const double decay = m.gamma * m.lambda;
    for (std::size_t n = 0; n < q.size(); ++n) {
        q[n] += m.alpha * delta * e[n];
        e[n] *= decay;
    }
    return delta;
}

ReplayResult replay(const EventStream& events, TabularSarsa& m) {
    ReplayResult out;
    out.delta.reserve(events.size());
    out.q.reserve(events.size());
    for (const SarsaTransition& tr : events) {
        out.delta.push_back(sarsa_update(m, tr.s, tr.a, tr.r, tr.s2, tr.a2));
        if (tr.terminal) m.e.fill(0.0);
        out.q.push_back(m.Q);
    }
    return out;
}

EventStream extract_event_stream(const RunLog& log, double reward_value, double reward_scale, bool terminal_on_reward) {
    EventStream out;
    const auto& trs = log.transitions;
    for (std::size_t k = 0; k + 1 < trs.size(); ++k) {
        if (trs[k].previous < 0) continue;
        SarsaTransition t;
        t.s = trs[k].previous;
        t.a = trs[k].completed;
        t.r = trs[k].reward_started ? reward_value * reward_scale : 0.0;
        t.s2 = trs[k].completed;
        t.a2 = trs[k + 1].completed;
        t.terminal = terminal_on_reward && trs[k].reward_started;
        t.step = trs[k].step;
        t.t = trs[k].t;
        out.push_back(t);
    }
    return out;
}

LambdaFit fit_lambda(const RunLog& log, double gamma) {
    LambdaFit fit;
    double log_sum = 0.0;
    for (const TransitionRecord& tr : log.transitions) {
        std::vector<double> u;
        for (double x : tr.u.values())
            if (x > 1e-3) u.push_back(x);
        std::sort(u.rbegin(), u.rend());
        for (std::size_t n = 1; n < u.size(); ++n) {
            log_sum += std::log(u[n] / u[n - 1]);
            ++fit.samples;
        }
    }
    if (fit.samples == 0 || !(gamma > 0.0)) return fit;
    fit.rho = std::exp(log_sum / static_cast<double>(fit.samples));
    fit.lambda = std::clamp(fit.rho / gamma, 1e-6, 1.0 - 1e-6);
    return fit;
}

double vo_gate_window(double tau_tp, double threshold) {
    const double peak = std::exp(-1.0);
    if (threshold >= peak) return 0.0;
    auto g = [threshold](double s) { return s * std::exp(-s) - threshold; };
    auto bisect = [&g](double lo, double hi) {
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if ((g(lo) < 0.0) == (g(mid) < 0.0)) lo = mid;
            else hi = mid;
        }
        return 0.5 * (lo + hi);
    };
    if (threshold <= 0.0) return std::numeric_limits<double>::infinity();
    double hi = 2.0;
    while (g(hi) > 0.0) hi *= 2.0;
    return tau_tp * (bisect(1.0, hi) - bisect(0.0, 1.0));
}

namespace {

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2) return 0.0;
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

// Same direction, or both sides numerically unchanged. A negligible change
// on one side still disagrees with a real change of the other sign.
bool signs_agree(double dn, double orc, double tol_dn, double tol_or) {
    if (std::abs(dn) <= tol_dn && std::abs(orc) <= tol_or) return true;
    return sign_of(dn) == sign_of(orc);
}

std::string alignment_dump(const RunLog& log, std::size_t completed_events) {
    std::ostringstream os;
    os << "transitions=" << log.transitions.size() << " transition_td=" << log.transition_td.size()
       << " completed_events=" << completed_events << "; first transitions:";
    for (std::size_t k = 0; k < std::min<std::size_t>(log.transitions.size(), 8); ++k)
        os << " (" << log.transitions[k].step << ": " << log.transitions[k].previous << "->"
           << log.transitions[k].completed << ")";
    os << "; first completed events:";
    std::size_t shown = 0;
    for (const BehaviorEvent& e : log.events) {
        if (!e.completed()) continue;
        os << " (" << e.behavior << " @" << e.cos_time << ")";
        if (++shown == 8) break;
    }
    return os.str();
}

}  // namespace

CompareReport compare(const RunLog& log, const ExperimentConfig& cfg, const CompareThresholds& th) {
    const std::size_t completed_events = static_cast<std::size_t>(
        std::count_if(log.events.begin(), log.events.end(), [](const BehaviorEvent& e) { return e.completed(); }));
    if (log.transition_td.size() != log.transitions.size() || completed_events != log.transitions.size())
        throw AlignmentError("DN run cannot be aligned with the oracle: " + alignment_dump(log, completed_events));

    const LearnerParams& lp = cfg.learner;
    CompareReport rep;
    rep.fit = fit_lambda(log, lp.gamma);
    rep.gate_window = vo_gate_window(lp.tau_tp, lp.vo_threshold);
    rep.alpha_oracle = lp.alpha_w * rep.gate_window;
    const double reward_integral = cfg.reward_value * cfg.reward_duration * cfg.dt;
    rep.reward_oracle = rep.gate_window > 0.0 ? reward_integral / rep.gate_window : 0.0;

    const std::size_t k = log.behaviors;
    TabularSarsa m = TabularSarsa::make(k, k, rep.alpha_oracle, lp.gamma, rep.fit.lambda);
    const EventStream stream = extract_event_stream(log, rep.reward_oracle, 1.0, cfg.reset_eligibility_on_reward);

    std::vector<double> dn_cells, or_cells, dn_mag, or_mag;
    const auto& trs = log.transitions;
    std::size_t next = 0;
    for (const SarsaTransition& st : stream) {
        while (next < trs.size() && trs[next].step != st.step) ++next;
        if (next + 1 >= trs.size()) break;
        const Matrix& w0 = trs[next].W;
        const Matrix& w1 = trs[next + 1].W;
        for (std::size_t s = 0; s < k; ++s)
            for (std::size_t a = 0; a < k; ++a) m.Q(s, a) = w0(a, s);

        const auto s = static_cast<std::size_t>(st.s), a = static_cast<std::size_t>(st.a);
        const double delta = st.r + m.gamma * m.Q(static_cast<std::size_t>(st.s2), static_cast<std::size_t>(st.a2)) - m.Q(s, a);
        if (m.replacing) m.e(s, a) = 1.0;
        else m.e(s, a) += 1.0;

        CompareRow row;
        row.t = st.t;
        row.s = st.s;
        row.a = st.a;
        row.r = st.r;
        row.delta_oracle = delta;
        for (std::size_t ss = 0; ss < k; ++ss)
            for (std::size_t aa = 0; aa < k; ++aa) {
                if (m.e(ss, aa) <= 0.0) continue;
                if (static_cast<int>(ss) == st.s2 && static_cast<int>(aa) == st.a2) continue;
                const double dn = w1(aa, ss) - w0(aa, ss);
                const double orc = m.alpha * delta * m.e(ss, aa);
                dn_cells.push_back(dn);
                or_cells.push_back(orc);
                if (ss == s && aa == a) {
                    row.dw_dn = dn;
                    row.dw_oracle = orc;
                }
            }
        rep.rows.push_back(row);

        const double decay = m.gamma * m.lambda;
        for (double& e : m.e.values()) e *= decay;
        if (st.terminal) m.e.fill(0.0);
    }

    rep.cells = dn_cells.size();
    double scale_or = 0.0, scale_dn = 0.0;
    for (std::size_t n = 0; n < rep.cells; ++n) {
        scale_or = std::max(scale_or, std::abs(or_cells[n]));
        scale_dn = std::max(scale_dn, std::abs(dn_cells[n]));
    }
    const double tol_or = 1e-3 * scale_or, tol_dn = 1e-3 * scale_dn;
    std::size_t agree = 0;
    for (std::size_t n = 0; n < rep.cells; ++n) {
        if (signs_agree(dn_cells[n], or_cells[n], tol_dn, tol_or)) ++agree;
        dn_mag.push_back(std::abs(dn_cells[n]));
        or_mag.push_back(std::abs(or_cells[n]));
    }
    for (CompareRow& row : rep.rows) row.sign_match = signs_agree(row.dw_dn, row.dw_oracle, tol_dn, tol_or);
    rep.sign_agreement = rep.cells ? static_cast<double>(agree) / static_cast<double>(rep.cells) : 0.0;
    rep.magnitude_correlation = pearson(dn_mag, or_mag);

    rep.degenerate = !cfg.learning || lp.alpha_w == 0.0 || scale_dn == 0.0;
    if (rep.degenerate) {
        rep.note = "degenerate comparison: DN weights never change (learning disabled or alpha_w = 0)";
        rep.passed = false;
    } else if (rep.rows.empty()) {
        rep.note = "no complete transitions to compare";
        rep.passed = false;
    } else {
        rep.passed = rep.sign_agreement >= th.sign_agreement && rep.magnitude_correlation >= th.magnitude_correlation;
    }
    return rep;
}

RunLog run_scripted(const ScriptedWorld& world, const ExperimentConfig& cfg, std::size_t transitions) {
    const std::size_t k = world.behaviors;
    if (k < 2) throw ConfigError("scripted world needs at least two behaviors");
    for (int t : world.target)
        if (t < 0 || static_cast<std::size_t>(t) >= k) throw ConfigError("scripted target out of range");
    const double dt = cfg.dt;
    validate(cfg.learner, dt);

    std::mt19937_64 rng(world.seed);
    LearnerState ls = LearnerState::zeros(k);
    std::uniform_real_distribution<double> w0(0.0, world.initial_weight_max);
    for (double& w : ls.weights.W.values()) w = w0(rng);
    RewardSchedule rs = RewardSchedule::make(world.target, cfg.reward_value, cfg.reward_duration);

    EBSet eb = EBSet::at_rest(k, cfg.nodes, cfg.node_sigmoid);
    auto set_nodes = [&](int intention, int cos) {
        for (std::size_t i = 0; i < k; ++i) {
            eb.d_int[i] = static_cast<int>(i) == intention ? world.drive : -world.drive;
            eb.d_cos[i] = static_cast<int>(i) == cos ? world.drive : -world.drive;
        }
    };

    RunLog log;
    log.behaviors = k;
    log.dt = dt;
    log.seed = world.seed;
    log.target = world.target;
    for (std::size_t i = 0; i < k; ++i) log.color_names.push_back(std::to_string(i));
    log.initial_weights = ls.weights.W;

    EventTracker tracker;
    long step = 0;
    double td_integral = 0.0;
    auto tick = [&](std::optional<int> completed, int previous) {
        const double t = static_cast<double>(step) * dt;
        const RewardTick rt = step_reward(rs, completed);
        if (rt.episode_started) {
            ++log.reward_episodes;
            if (!log.discovery_step) log.discovery_step = step;
        }
        if (completed) {
            if (!log.transitions.empty()) log.transition_td.push_back(td_integral);
            td_integral = 0.0;
            log.transitions.push_back(TransitionRecord{.step = step,
                                                       .t = t,
                                                       .completed = *completed,
                                                       .previous = previous,
                                                       .reward_started = rt.episode_started,
                                                       .W = ls.weights.W,
                                                       .u = ls.et.u});
        }
        const double dw = step_learner(ls, eb, rt.r, cfg.learner, dt, cfg.learning);
        if (rt.episode_ended && cfg.reset_eligibility_on_reward) reset_eligibility(ls);

        std::vector<double> fi(k), fc(k);
        for (std::size_t i = 0; i < k; ++i) {
            fi[i] = eb.f_int(i);
            fc[i] = eb.f_cos(i);
        }
        if (auto ev = tracker.push(t, fi, fc)) log.events.push_back(*ev);
        const double v = ls.value.v;
        log.steps.push_back(StepRow{.t = t, .r = rt.r, .v = v, .dW = dw, .intention = eb.active_intention(),
                                    .cos = eb.cos_flags()});
        log.cumulative_reward.push_back(log.total_reward() + rt.r);
        log.td.push_back(rt.r + v);
        td_integral += (rt.r + v) * dt;
        ++step;
    };

    const auto exec_ticks = std::max(1L, std::lround(world.execute_s / dt));
    const auto hand_ticks = std::max(1L, std::lround(world.handover_s / dt));
    std::uniform_int_distribution<std::size_t> pick(0, k - 2);
    int held = -1;
    int current = static_cast<int>(pick(rng) % k);
    // Two extra behaviors: the first has no prior state, the last no successor.
    for (std::size_t n = 0; n < transitions + 2; ++n) {
        set_nodes(current, held);
        // On the completion tick the CoS is already on while the intention
        // still is; the intention goes off on the next tick.
        for (long q = 0; q + 1 < exec_ticks; ++q) tick(std::nullopt, held);
        set_nodes(current, current);
        tick(current, held);
        set_nodes(-1, current);
        for (long q = 0; q < hand_ticks; ++q) tick(std::nullopt, current);
        held = current;
        auto nxt = static_cast<int>(pick(rng));
        if (nxt >= held) ++nxt;
        current = nxt;
    }
    if (auto ev = tracker.finish(static_cast<double>(step - 1) * dt)) log.events.push_back(*ev);
    if (!log.transitions.empty()) log.transition_td.push_back(td_integral);
    log.final_weights = ls.weights.W;
    log.exploration_steps = step;
    return log;
}

CompareReport compare_scripted(const ExperimentConfig& cfg, std::size_t transitions, const ScriptedWorld& world) {
    ExperimentConfig c = cfg;
    c.behaviors = world.behaviors;
    return compare(run_scripted(world, c, transitions), c);
}

void write_report(std::ostream& os, const CompareReport& r) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "# lambda_hat %.4f (rho %.4f, %zu ratios)  alpha %.5f  reward %.5f  gate %.4f s\n",
                  r.fit.lambda, r.fit.rho, r.fit.samples, r.alpha_oracle, r.reward_oracle, r.gate_window);
    os << buf;
    os << "t,s,a,r,delta_oracle,dW_dn,dW_oracle,sign_match\n";
    for (const CompareRow& row : r.rows) {
        std::snprintf(buf, sizeof buf, "%.5f,%d,%d,%.6g,%.6g,%.6g,%.6g,%d\n", row.t, row.s, row.a, row.r,
                      row.delta_oracle, row.dw_dn, row.dw_oracle, row.sign_match ? 1 : 0);
        os << buf;
    }
    std::snprintf(buf, sizeof buf, "# cells %zu  sign agreement %.4f  magnitude correlation %.4f  %s\n", r.cells,
                  r.sign_agreement, r.magnitude_correlation, r.passed ? "PASS" : "FAIL");
    os << buf;
    if (!r.note.empty()) os << "# " << r.note << '\n';
}

}  // namespace dnsarsa
