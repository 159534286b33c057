#pragma once

// Helpers shared by the unit tests: node-level scripting of the behavior
// engine, so learner dynamics can be checked without perception.

#include <cstddef>
#include <optional>
#include <vector>

#include "dnsarsa/behavior.hpp"
#include "dnsarsa/learner.hpp"

namespace dnsarsa::testing {

inline EBSet scripted_eb(std::size_t k) { return EBSet::at_rest(k, NodeCoefficients{}, SigmoidParams{}); }

/// Intention `intention` and CoS `cos` fully on, everything else fully off.
inline void drive(EBSet& eb, int intention, int cos, double level = 5.0) {
    for (std::size_t i = 0; i < eb.size(); ++i) {
        eb.d_int[i] = static_cast<int>(i) == intention ? level : -level;
        eb.d_cos[i] = static_cast<int>(i) == cos ? level : -level;
    }
}

inline void run_learner(LearnerState& ls, const EBSet& eb, const LearnerParams& p, double seconds,
                        double dt = 1.0 / 32.0, double r = 0.0) {
    const long n = static_cast<long>(seconds / dt + 0.5);
    for (long i = 0; i < n; ++i) step_learner(ls, eb, r, p, dt);
}

/// Plays behaviors in order: each runs `execute_s` with the previous CoS
/// held, then its own CoS turns on. Returns the learner afterwards.
inline void play(LearnerState& ls, EBSet& eb, const LearnerParams& p, const std::vector<int>& seq,
                 double execute_s = 3.0, int held = -1) {
    for (int b : seq) {
        drive(eb, b, held);
        run_learner(ls, eb, p, execute_s);
        drive(eb, -1, b);
        run_learner(ls, eb, p, 0.25);
        held = b;
    }
}

}  // namespace dnsarsa::testing
