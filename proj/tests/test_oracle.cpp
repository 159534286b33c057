#include <cmath>
#include <map>

#include "doctest.h"
#include "dnsarsa/config.hpp"
#include "dnsarsa/errors.hpp"
#include "dnsarsa/oracle.hpp"

using namespace dnsarsa;

TEST_CASE("single SARSA update") {
    TabularSarsa m = TabularSarsa::make(4, 4, 0.1, 0.8, 0.8);
    const double d = sarsa_update(m, 0, 1, 1.0, 1, 2);
    CHECK(d == doctest::Approx(1.0));
    CHECK(m.Q(0, 1) == doctest::Approx(0.1));

    TabularSarsa z = TabularSarsa::make(4, 4, 0.1, 0.8, 0.8);
    CHECK(sarsa_update(z, 2, 3, 0.0, 3, 0) == 0.0);
    CHECK(z.Q.max_abs() == 0.0);
}

TEST_CASE("two-step trace credit") {
    const double alpha = 0.1;
    TabularSarsa m = TabularSarsa::make(3, 3, alpha, 0.8, 0.8);
    sarsa_update(m, 0, 1, 0.0, 1, 2);
    sarsa_update(m, 1, 2, 1.0, 2, 0);
    CHECK(m.Q(1, 2) == doctest::Approx(alpha));
    CHECK(m.Q(0, 1) == doctest::Approx(0.64 * alpha));
}

TEST_CASE("chain credit decays by gamma * lambda per step") {
    const double alpha = 0.2, g = 0.9, l = 0.7;
    TabularSarsa m = TabularSarsa::make(6, 6, alpha, g, l);
    for (int s = 0; s < 4; ++s) sarsa_update(m, s, s + 1, s == 3 ? 1.0 : 0.0, s + 1, s + 2);
    for (int s = 0; s < 4; ++s) CHECK(m.Q(s, s + 1) == doctest::Approx(alpha * std::pow(g * l, 3 - s)));
}

TEST_CASE("replay") {
    TabularSarsa m = TabularSarsa::make(4, 4, 0.1, 0.8, 0.8);
    const ReplayResult empty = replay({}, m);
    CHECK(empty.delta.empty());
    CHECK(empty.q.empty());

    // G,B,Y,R,G with R = 0 .. Y = 3, rewarded on the closing G; each
    // episode ends on the reward and the next starts from that G.
    const std::vector<std::pair<int, int>> pairs{{1, 2}, {2, 3}, {3, 0}, {0, 1}};
    EventStream ev;
    for (int rep = 0; rep < 50; ++rep)
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            const auto [s, a] = pairs[k];
            const auto next = pairs[(k + 1) % pairs.size()];
            const bool last = k + 1 == pairs.size();
            ev.push_back(SarsaTransition{
                .s = s, .a = a, .r = last ? 1.0 : 0.0, .s2 = a, .a2 = next.second, .terminal = last});
        }
    TabularSarsa q = TabularSarsa::make(4, 4, 0.1, 0.8, 0.8);
    const ReplayResult rr = replay(ev, q);
    REQUIRE(rr.delta.size() == ev.size());
    REQUIRE(rr.q.size() == ev.size());
    const std::map<int, int> want{{1, 2}, {2, 3}, {3, 0}, {0, 1}};
    for (auto [s, a] : want) {
        int best = -1;
        for (int x = 0; x < 4; ++x)
            if (x != s && (best < 0 || q.Q(s, x) > q.Q(s, best))) best = x;
        CHECK(best == a);
    }
    double tail = 0.0;
    const std::size_t from = rr.delta.size() * 3 / 4;
    for (std::size_t n = from; n < rr.delta.size(); ++n) tail += rr.delta[n];
    CHECK(std::abs(tail / static_cast<double>(rr.delta.size() - from)) < 0.1);
}

TEST_CASE("gate window of the value-opposition pulse") {
    CHECK(vo_gate_window(0.5, 0.05) == doctest::Approx(2.2235).epsilon(1e-3).scale(0.0));
    CHECK(vo_gate_window(0.5, 0.5) == 0.0);
    const double t = vo_gate_window(1.0, 0.1);
    CHECK(t > 0.0);
    // Both crossing points satisfy s e^-s = threshold.
    CHECK(vo_gate_window(2.0, 0.1) == doctest::Approx(2.0 * t));
}

TEST_CASE("event stream from a scripted run") {
    ExperimentConfig cfg;
    cfg.reward_duration = 16;
    const ScriptedWorld world{.behaviors = 3, .target = {0, 1, 2, 0}};
    const RunLog log = run_scripted(world, cfg, 60);
    REQUIRE(log.transitions.size() == 62);
    const EventStream ev = extract_event_stream(log, 1.0);
    CHECK(ev.size() == 60);
    for (std::size_t k = 0; k < ev.size(); ++k) {
        CHECK(ev[k].s != ev[k].a);
        CHECK(ev[k].s2 == ev[k].a);
        if (k + 1 < ev.size()) {
            CHECK(ev[k + 1].s == ev[k].s2);
            CHECK(ev[k + 1].a == ev[k].a2);
        }
        CHECK((ev[k].r == 0.0 || ev[k].terminal));
    }
    long rewarded = 0;
    for (const auto& t : ev) rewarded += t.r > 0.0;
    CHECK(rewarded <= log.reward_episodes);
}

TEST_CASE("lambda fit on a scripted run") {
    ExperimentConfig cfg;
    const RunLog log = run_scripted(ScriptedWorld{}, cfg, 80);
    const LambdaFit fit = fit_lambda(log, cfg.learner.gamma);
    CHECK(fit.samples > 0);
    CHECK(fit.rho > 0.0);
    CHECK(fit.rho < 1.0);
    CHECK(fit.lambda > 0.0);
    CHECK(fit.lambda < 1.0);
}

TEST_CASE("comparison flags a frozen learner as degenerate") {
    ExperimentConfig cfg;
    cfg.learner.alpha_w = 0.0;
    const CompareReport rep = compare_scripted(cfg, 40);
    CHECK(rep.degenerate);
    CHECK_FALSE(rep.passed);
    CHECK_FALSE(rep.note.empty());
}

TEST_CASE("comparison refuses a misaligned log") {
    ExperimentConfig cfg;
    RunLog log = run_scripted(ScriptedWorld{}, cfg, 20);
    log.transition_td.pop_back();
    CHECK_THROWS_AS(compare(log, cfg), AlignmentError);
}

TEST_CASE("scripted comparison agrees with tabular SARSA") {
    ExperimentConfig cfg;
    const CompareReport rep = compare_scripted(cfg, 200);
    CHECK(rep.cells > 200);
    CHECK(rep.sign_agreement >= 0.99);
    CHECK(rep.magnitude_correlation >= 0.95);
    CHECK(rep.passed);
}
