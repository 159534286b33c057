#pragma once

// Closed-loop run orchestration: ring world -> behavior engine -> motor ->
// reward -> learner, one fixed-order tick at a time, plus logging, batch
// runs over seeds and metric export.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dnsarsa/behavior.hpp"
#include "dnsarsa/config.hpp"
#include "dnsarsa/environment.hpp"
#include "dnsarsa/events.hpp"
#include "dnsarsa/learner.hpp"
#include "dnsarsa/matrix.hpp"
#include "dnsarsa/perception.hpp"

namespace dnsarsa {

struct StepRow {
    double t = 0.0;
    double r = 0.0;
    double v = 0.0;
    double dW = 0.0;     ///< sum |dW| applied this tick
    int intention = -1;  ///< supra-threshold intention, -1 if none
    unsigned cos = 0;    ///< bit i = CoS node i supra-threshold
};

/// Snapshot taken on the tick a CoS node switches on (a behavior completed).
struct TransitionRecord {
    long step = 0;
    double t = 0.0;
    int completed = -1;
    int previous = -1;  ///< behavior whose CoS was held before, -1 at the start
    bool reward_started = false;
    Matrix W;  ///< weights at this tick, before the learner update
    Matrix u;  ///< eligibility trace at this tick
};

struct RunLog {
    std::size_t behaviors = 0;
    double dt = 1.0 / 32.0;
    long exploration_steps = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> color_names;
    std::vector<int> target;

    std::vector<StepRow> steps;
    std::vector<BehaviorEvent> events;
    std::vector<double> cumulative_reward;
    std::vector<double> td;  ///< r + v per tick
    std::vector<TransitionRecord> transitions;
    /// Integral of (r + v) dt between consecutive transitions; entry k covers
    /// [transitions[k], transitions[k+1]) and the last one runs to the end.
    std::vector<double> transition_td;

    std::vector<long> noise_injection_steps;
    long spurious_cos_onsets = 0;  ///< CoS onsets without their intention active
    long reward_episodes = 0;
    std::optional<long> discovery_step;  ///< first tick of the first reward episode
    /// Runs of ticks with more than one supra-threshold intention: (first step, length).
    std::vector<std::pair<long, long>> wta_overlaps;

    Matrix initial_weights;
    Matrix final_weights;
    RingWorld world;  ///< layout at t = 0
    std::optional<NodeTrace> trace;

    double total_reward() const { return cumulative_reward.empty() ? 0.0 : cumulative_reward.back(); }
    /// Completed behaviors whose CoS switched on before `step`.
    std::size_t completed_before(long step) const;
};

/// Full closed-loop state. `tick()` advances one dt in the fixed order
/// percept -> perceptual/CoS fields -> CoS nodes -> value read-out ->
/// intention nodes -> motor -> world -> reward -> learner -> log.
class Simulation {
public:
    explicit Simulation(const ExperimentConfig& cfg);

    void tick();
    long step() const noexcept { return step_; }
    bool exploring() const noexcept { return step_ < cfg_.exploration_steps; }

    const ExperimentConfig& config() const noexcept { return cfg_; }
    const RingWorld& world() const noexcept { return world_; }
    const EBSet& eb() const noexcept { return eb_; }
    const LearnerState& learner() const noexcept { return learner_; }
    LearnerState& learner() noexcept { return learner_; }
    const PerceptionState& perception() const noexcept { return perception_; }
    const RewardSchedule& reward() const noexcept { return reward_; }
    const std::vector<double>& noise() const noexcept { return noise_; }

    /// Closes open events and returns the log; the simulation is spent afterwards.
    RunLog finish();

private:
    void resample_noise();
    void check_finite() const;

    ExperimentConfig cfg_;
    RingWorld world_;
    PerceptionState perception_;
    EBSet eb_;
    LearnerState learner_;
    RewardSchedule reward_;
    std::mt19937_64 rng_;
    std::vector<double> noise_;
    int held_cos_ = -1;
    unsigned prev_cos_flags_ = 0;
    long step_ = 0;
    long overlap_start_ = -1;
    double td_integral_ = 0.0;
    EventTracker tracker_;
    RunLog log_;
};

/// Validates the config and runs total_steps ticks. Throws DivergenceError
/// with the step index on any non-finite state.
RunLog run_experiment(const ExperimentConfig& cfg);

struct SeedOutcome {
    std::uint64_t seed = 0;
    std::optional<RunLog> log;
    std::string error;  ///< set when the run threw
};

struct BatchResult {
    std::vector<SeedOutcome> runs;
    std::vector<double> mean_cumulative_reward;  ///< per tick, over successful runs
    std::vector<double> mean_abs_td;             ///< per tick
    std::vector<std::optional<long>> discovery_steps;

    std::size_t failures() const;
};

enum class Execution { Serial, Parallel };

/// Seeds cfg.seed, cfg.seed + 1, ... Runs are fully isolated; failures are
/// recorded per seed and do not stop the batch.
BatchResult run_batch(const ExperimentConfig& cfg, std::size_t n_seeds, Execution mode = Execution::Parallel);

/// Target as a repeating cycle: G,B,Y,R,G -> G,B,Y,R. A target whose first
/// and last entries differ is its own cycle.
std::vector<int> target_cycle(const std::vector<int>& target);

/// Greedy successor per state: argmax_{i != j} W(i, j), -1 when column j is flat.
std::vector<int> greedy_policy(const Matrix& w);

/// True when every consecutive pair of completed behaviors from `from_step`
/// on follows the target cycle and at least `min_cycles` full cycles occur.
bool follows_target(const RunLog& log, long from_step, std::size_t min_cycles = 2);

/// Mean |integrated TD| over transitions whose tick lies in [from, to).
double mean_abs_transition_td(const RunLog& log, long from, long to);

/// steps.csv, events.csv, summary.json, weights.txt, layout.json, config.txt.
void export_metrics(const RunLog& log, const std::string& dir, const ExperimentConfig* cfg = nullptr);

/// batch.csv (per-second means) and seeds.csv.
void export_batch(const BatchResult& batch, const std::string& dir, long exploration_steps, double dt);

std::string summary_json(const RunLog& log);

}  // namespace dnsarsa
