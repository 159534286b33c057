#include "dnsarsa/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dnsarsa/errors.hpp"
#include "dnsarsa/weights_io.hpp"

namespace dnsarsa {

std::size_t RunLog::completed_before(long step) const {
    return static_cast<std::size_t>(std::count_if(transitions.begin(), transitions.end(),
                                                  [step](const TransitionRecord& tr) { return tr.step < step; }));
}

Simulation::Simulation(const ExperimentConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {
    sync_derived(cfg_);
    validate(cfg_);
    const std::size_t k = cfg_.behaviors;
    world_ = reset(cfg_.world, cfg_.seed);
    perception_ = PerceptionState::at_rest(cfg_.perception);
    eb_ = EBSet::at_rest(k, cfg_.nodes, cfg_.node_sigmoid);
    learner_ = LearnerState::zeros(k);
    if (cfg_.initial_weights) learner_.weights.W = *cfg_.initial_weights;
    reward_ = RewardSchedule::make(cfg_.target, cfg_.reward_value, cfg_.reward_duration);
    // Decorrelate the noise stream from the layout draw.
    rng_.seed(cfg_.seed ^ 0x9e3779b97f4a7c15ULL);
    noise_.assign(k, 0.0);

    log_.behaviors = k;
    log_.dt = cfg_.dt;
    log_.exploration_steps = cfg_.exploration_steps;
    log_.seed = cfg_.seed;
    log_.color_names = cfg_.color_names;
    log_.target = cfg_.target;
    log_.world = world_;
    log_.initial_weights = learner_.weights.W;
    const auto n = static_cast<std::size_t>(std::max(cfg_.total_steps, 0L));
    log_.steps.reserve(n);
    log_.cumulative_reward.reserve(n);
    log_.td.reserve(n);
    if (cfg_.record_trace) log_.trace = NodeTrace{.dt = cfg_.dt, .behaviors = k, .f_int = {}, .f_cos = {}};

    if (exploring()) resample_noise();
}

void Simulation::resample_noise() {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double& x : noise_) x = cfg_.noise_amplitude * u(rng_);
    log_.noise_injection_steps.push_back(step_);
}

void Simulation::check_finite() const {
    auto fail = [this](const std::string& what) {
        std::ostringstream os;
        os << "non-finite " << what << "; d_int =";
        for (double x : eb_.d_int) os << ' ' << x;
        os << "; d_cos =";
        for (double x : eb_.d_cos) os << ' ' << x;
        os << "; v = " << learner_.value.v << "; heading = " << world_.heading;
        throw DivergenceError(os.str(), step_);
    };
    if (!eb_.all_finite()) fail("behavior node state");
    if (!learner_.all_finite()) fail("learner state");
    if (!perception_.percept.field.u.all_finite() || !perception_.cos.field.u.all_finite() ||
        !perception_.motor.field.u.all_finite())
        fail("field state");
    if (!std::isfinite(world_.heading)) fail("heading");
}

void Simulation::tick() {
    const double dt = cfg_.dt;
    const double t = static_cast<double>(step_) * dt;
    const PerceptionParams& pp = cfg_.perception;

    if (step_ == cfg_.exploration_steps) std::fill(noise_.begin(), noise_.end(), 0.0);

    const Matrix percept = render_percept(world_, pp.geometry);
    step_percept_and_cos_fields(percept, eb_, perception_, pp, dt);
    const std::vector<double> cin = cos_field_input(perception_.cos, pp.geometry);
    step_cos_nodes(eb_, cin, dt);

    // A completion is the CoS node of the active intention crossing 0.5
    // from below. CoS onsets of other behaviors are counted as spurious.
    std::optional<int> completed;
    const unsigned cos_flags = eb_.cos_flags();
    for (std::size_t i = 0; i < eb_.size(); ++i) {
        const bool rising = (cos_flags >> i & 1u) && !(prev_cos_flags_ >> i & 1u);
        if (!rising) continue;
        if (eb_.f_int(i) > 0.5 && static_cast<int>(i) != held_cos_) completed = static_cast<int>(i);
        else if (static_cast<int>(i) != held_cos_) ++log_.spurious_cos_onsets;
    }
    prev_cos_flags_ = cos_flags;
    if (completed && exploring()) resample_noise();

    read_value_nodes(eb_, learner_.weights.W, noise_, cfg_.value_readout);
    step_intention_nodes(eb_, dt);

    const double omega = motor_command(perception_, eb_, pp, dt);
    apply_motor(world_, omega, dt);

    const RewardTick rt = step_reward(reward_, completed);
    if (rt.episode_started) {
        ++log_.reward_episodes;
        if (!log_.discovery_step) log_.discovery_step = step_;
    }

    if (completed) {
        if (!log_.transitions.empty()) log_.transition_td.push_back(td_integral_);
        td_integral_ = 0.0;
        log_.transitions.push_back(TransitionRecord{.step = step_,
                                                    .t = t,
                                                    .completed = *completed,
                                                    .previous = held_cos_,
                                                    .reward_started = rt.episode_started,
                                                    .W = learner_.weights.W,
                                                    .u = learner_.et.u});
        held_cos_ = *completed;
    }

    const double dw = step_learner(learner_, eb_, rt.r, cfg_.learner, dt, cfg_.learning);
    if (rt.episode_ended && cfg_.reset_eligibility_on_reward) reset_eligibility(learner_);

    check_finite();

    // Log. Overlapping intentions are recorded and the strongest one is fed
    // to the segmenter so events stay well formed.
    const std::size_t k = eb_.size();
    std::vector<double> fi(k), fc(k);
    int supra = 0;
    for (std::size_t i = 0; i < k; ++i) {
        fi[i] = eb_.f_int(i);
        fc[i] = eb_.f_cos(i);
        if (fi[i] > 0.5) ++supra;
    }
    const int active = eb_.active_intention();
    if (supra > 1) {
        if (overlap_start_ < 0) overlap_start_ = step_;
        for (std::size_t i = 0; i < k; ++i)
            if (static_cast<int>(i) != active) fi[i] = std::min(fi[i], 0.5);
    } else if (overlap_start_ >= 0) {
        log_.wta_overlaps.emplace_back(overlap_start_, step_ - overlap_start_);
        overlap_start_ = -1;
    }
    if (auto ev = tracker_.push(t, fi, fc)) log_.events.push_back(*ev);
    if (log_.trace) log_.trace->push(fi, fc);

    const double v = learner_.value.v;
    log_.steps.push_back(StepRow{.t = t, .r = rt.r, .v = v, .dW = dw, .intention = active, .cos = eb_.cos_flags()});
    log_.cumulative_reward.push_back(log_.total_reward() + rt.r);
    log_.td.push_back(rt.r + v);
    td_integral_ += (rt.r + v) * dt;
    ++step_;
}

RunLog Simulation::finish() {
    const double t_end = step_ > 0 ? static_cast<double>(step_ - 1) * cfg_.dt : 0.0;
    if (auto ev = tracker_.finish(t_end)) log_.events.push_back(*ev);
    if (!log_.transitions.empty()) log_.transition_td.push_back(td_integral_);
    if (overlap_start_ >= 0) log_.wta_overlaps.emplace_back(overlap_start_, step_ - overlap_start_);
    log_.final_weights = learner_.weights.W;
    return std::move(log_);
}

RunLog run_experiment(const ExperimentConfig& cfg) {
    Simulation sim(cfg);
    for (long s = 0; s < sim.config().total_steps; ++s) sim.tick();
    return sim.finish();
}

std::size_t BatchResult::failures() const {
    return static_cast<std::size_t>(std::count_if(runs.begin(), runs.end(), [](const SeedOutcome& o) { return !o.log; }));
}

BatchResult run_batch(const ExperimentConfig& cfg, std::size_t n_seeds, Execution mode) {
    if (n_seeds == 0) throw ConfigError("batch needs at least one seed");
    BatchResult out;
    out.runs.resize(n_seeds);

    auto one = [&](std::size_t i) {
        SeedOutcome& o = out.runs[i];
        o.seed = cfg.seed + i;
        ExperimentConfig c = cfg;
        c.seed = o.seed;
        try {
            o.log = run_experiment(c);
        } catch (const std::exception& e) {
            o.error = e.what();
        }
    };
    const auto n = static_cast<long>(n_seeds);
    if (mode == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (long i = 0; i < n; ++i) one(static_cast<std::size_t>(i));
    } else {
        for (long i = 0; i < n; ++i) one(static_cast<std::size_t>(i));
    }

    const auto steps = static_cast<std::size_t>(std::max(cfg.total_steps, 0L));
    out.mean_cumulative_reward.assign(steps, 0.0);
    out.mean_abs_td.assign(steps, 0.0);
    std::size_t ok = 0;
    for (const SeedOutcome& o : out.runs) {
        out.discovery_steps.push_back(o.log ? o.log->discovery_step : std::nullopt);
        if (!o.log) continue;
        ++ok;
        for (std::size_t s = 0; s < steps; ++s) {
            out.mean_cumulative_reward[s] += o.log->cumulative_reward[s];
            out.mean_abs_td[s] += std::abs(o.log->td[s]);
        }
    }
    if (ok > 0)
        for (std::size_t s = 0; s < steps; ++s) {
            out.mean_cumulative_reward[s] /= static_cast<double>(ok);
            out.mean_abs_td[s] /= static_cast<double>(ok);
        }
    return out;
}

std::vector<int> target_cycle(const std::vector<int>& target) {
    if (target.size() >= 2 && target.front() == target.back()) return {target.begin(), target.end() - 1};
    return target;
}

std::vector<int> greedy_policy(const Matrix& w) {
    std::vector<int> policy(w.cols(), -1);
    for (std::size_t j = 0; j < w.cols(); ++j) {
        double best = -std::numeric_limits<double>::infinity(), worst = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < w.rows(); ++i) {
            if (i == j) continue;  // a behavior never follows itself
            if (w(i, j) > best) {
                best = w(i, j);
                policy[j] = static_cast<int>(i);
            }
            worst = std::min(worst, w(i, j));
        }
        if (best - worst < 1e-12) policy[j] = -1;
    }
    return policy;
}

bool follows_target(const RunLog& log, long from_step, std::size_t min_cycles) {
    const std::vector<int> cycle = target_cycle(log.target);
    if (cycle.empty()) return false;
    std::vector<int> seq;
    for (const TransitionRecord& tr : log.transitions)
        if (tr.step >= from_step) seq.push_back(tr.completed);
    if (seq.size() < min_cycles * cycle.size() + 1) return false;
    auto next_of = [&](int b) {
        const auto it = std::find(cycle.begin(), cycle.end(), b);
        return it == cycle.end() ? -2 : cycle[static_cast<std::size_t>(it - cycle.begin() + 1) % cycle.size()];
    };
    for (std::size_t n = 1; n < seq.size(); ++n)
        if (next_of(seq[n - 1]) != seq[n]) return false;
    return true;
}

double mean_abs_transition_td(const RunLog& log, long from, long to) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < log.transition_td.size() && k < log.transitions.size(); ++k) {
        const long s = log.transitions[k].step;
        if (s < from || s >= to) continue;
        sum += std::abs(log.transition_td[k]);
        ++n;
    }
    return n ? sum / static_cast<double>(n) : 0.0;
}

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream os(p);
    if (!os) throw std::runtime_error("cannot open " + p.string() + " for writing");
    return os;
}

void close_out(std::ofstream& os, const std::filesystem::path& p) {
    os.close();
    if (!os) throw std::runtime_error("failed writing " + p.string());
}

std::string color_name(const RunLog& log, int b) {
    if (b < 0) return "";
    const auto i = static_cast<std::size_t>(b);
    return i < log.color_names.size() ? log.color_names[i] : std::to_string(b);
}

}  // namespace

std::string summary_json(const RunLog& log) {
    nlohmann::ordered_json j;
    j["seed"] = log.seed;
    j["total_steps"] = log.steps.size();
    j["exploration_steps"] = log.exploration_steps;
    j["dt"] = log.dt;
    j["discovery_step"] = log.discovery_step ? nlohmann::ordered_json(*log.discovery_step) : nlohmann::ordered_json();
    j["total_reward"] = log.total_reward();
    j["reward_episodes"] = log.reward_episodes;
    j["completed_behaviors"] = log.transitions.size();
    j["completed_behaviors_exploration"] = log.completed_before(log.exploration_steps);
    j["noise_injections"] = log.noise_injection_steps.size();
    j["mean_abs_td_exploration"] = mean_abs_transition_td(log, 0, log.exploration_steps);
    j["mean_abs_td_exploitation"] =
        mean_abs_transition_td(log, log.exploration_steps, static_cast<long>(log.steps.size()));
    nlohmann::ordered_json policy = nlohmann::ordered_json::object();
    const std::vector<int> pol = greedy_policy(log.final_weights);
    for (std::size_t s = 0; s < pol.size(); ++s)
        policy[color_name(log, static_cast<int>(s))] =
            pol[s] < 0 ? nlohmann::ordered_json() : nlohmann::ordered_json(color_name(log, pol[s]));
    j["final_policy"] = policy;
    return j.dump(2);
}

void export_metrics(const RunLog& log, const std::string& dir, const ExperimentConfig* cfg) {
    namespace fs = std::filesystem;
    const fs::path root(dir);
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) throw std::runtime_error("cannot create " + root.string() + ": " + ec.message());

    {
        const fs::path p = root / "steps.csv";
        auto os = open_out(p);
        os << "t,r,v,dW,intention,cos\n";
        for (const StepRow& s : log.steps)
            os << format_double(s.t) << ',' << format_double(s.r) << ',' << format_double(s.v) << ','
               << format_double(s.dW) << ',' << s.intention << ',' << s.cos << '\n';
        close_out(os, p);
    }
    {
        const fs::path p = root / "events.csv";
        auto os = open_out(p);
        os << "behavior,t_on,t_off,cos_time\n";
        for (const BehaviorEvent& e : log.events)
            os << e.behavior << ',' << format_double(e.t_on) << ',' << format_double(e.t_off) << ','
               << format_double(e.cos_time) << '\n';
        close_out(os, p);
    }
    {
        const fs::path p = root / "summary.json";
        auto os = open_out(p);
        os << summary_json(log) << '\n';
        close_out(os, p);
    }
    if (log.final_weights.size() > 0) save_weights(log.final_weights, (root / "weights.txt").string());
    {
        const fs::path p = root / "layout.json";
        auto os = open_out(p);
        os << layout_json(log.world, log.color_names) << '\n';
        close_out(os, p);
    }
    if (cfg) {
        const fs::path p = root / "config.txt";
        auto os = open_out(p);
        write_config(os, *cfg);
        close_out(os, p);
    }
}

void export_batch(const BatchResult& batch, const std::string& dir, long exploration_steps, double dt) {
    namespace fs = std::filesystem;
    const fs::path root(dir);
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) throw std::runtime_error("cannot create " + root.string() + ": " + ec.message());

    {
        const fs::path p = root / "batch.csv";
        auto os = open_out(p);
        os << "t,mean_cumulative_reward,mean_abs_td\n";
        const auto per_second = static_cast<std::size_t>(std::max(1.0, std::round(1.0 / dt)));
        const std::size_t n = batch.mean_cumulative_reward.size();
        for (std::size_t s = 0; s < n; s += per_second) {
            double td = 0.0;
            const std::size_t end = std::min(n, s + per_second);
            for (std::size_t q = s; q < end; ++q) td += batch.mean_abs_td[q];
            td /= static_cast<double>(end - s);
            os << format_double(static_cast<double>(s) * dt) << ',' << format_double(batch.mean_cumulative_reward[end - 1])
               << ',' << format_double(td) << '\n';
        }
        close_out(os, p);
    }
    {
        const fs::path p = root / "seeds.csv";
        auto os = open_out(p);
        os << "seed,discovery_step,reward_episodes,completed_exploration,converged,error\n";
        for (const SeedOutcome& o : batch.runs) {
            os << o.seed << ',';
            if (o.log) {
                const RunLog& l = *o.log;
                const long n = static_cast<long>(l.steps.size());
                const long tail = exploration_steps + 3 * (n - exploration_steps) / 4;
                os << (l.discovery_step ? std::to_string(*l.discovery_step) : "") << ',' << l.reward_episodes << ','
                   << l.completed_before(exploration_steps) << ',' << (follows_target(l, tail) ? 1 : 0) << ",\n";
            } else {
                std::string err = o.error;
                std::replace(err.begin(), err.end(), ',', ';');
                std::replace(err.begin(), err.end(), '\n', ' ');
                os << ",,,," << err << '\n';
            }
        }
        close_out(os, p);
    }
}

}  // namespace dnsarsa
