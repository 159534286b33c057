#include <algorithm>
#include <filesystem>
#include <limits>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "dnsarsa/config.hpp"
#include "dnsarsa/errors.hpp"
#include "dnsarsa/experiment.hpp"

using namespace dnsarsa;
namespace fs = std::filesystem;

namespace {

ExperimentConfig short_run(long steps, long explore, std::uint64_t seed = 3) {
    ExperimentConfig c;
    c.total_steps = steps;
    c.exploration_steps = explore;
    c.seed = seed;
    return c;
}

/// W that encodes G -> B -> Y -> R -> G (R = 0, G = 1, B = 2, Y = 3).
Matrix target_weights() {
    Matrix w = Matrix::square(4);
    w(2, 1) = 0.6;
    w(3, 2) = 0.7;
    w(0, 3) = 0.8;
    w(1, 0) = 1.0;
    return w;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("dnsarsa_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("zero steps gives an empty log") {
    const RunLog log = run_experiment(short_run(0, 0));
    CHECK(log.steps.empty());
    CHECK(log.events.empty());
    CHECK(log.transitions.empty());
    CHECK(log.total_reward() == 0.0);
}

TEST_CASE("runs are deterministic") {
    const ExperimentConfig c = short_run(3000, 2000, 11);
    const RunLog a = run_experiment(c), b = run_experiment(c);
    REQUIRE(a.steps.size() == b.steps.size());
    for (std::size_t n = 0; n < a.steps.size(); ++n) {
        CHECK(a.steps[n].v == b.steps[n].v);
        CHECK(a.steps[n].intention == b.steps[n].intention);
    }
    CHECK(a.final_weights == b.final_weights);
    CHECK(a.noise_injection_steps == b.noise_injection_steps);

    const fs::path da = scratch("det_a"), db = scratch("det_b");
    export_metrics(a, da.string());
    export_metrics(b, db.string());
    CHECK(slurp(da / "steps.csv") == slurp(db / "steps.csv"));
    fs::remove_all(da);
    fs::remove_all(db);
}

TEST_CASE("exploration produces sequential, non-overlapping behaviors") {
    const RunLog log = run_experiment(short_run(6000, 6000, 5));
    CHECK(log.transitions.size() >= 20);
    CHECK(log.wta_overlaps.empty());
    for (std::size_t i = 1; i < log.events.size(); ++i) CHECK(log.events[i].t_on >= log.events[i - 1].t_off);
    std::size_t completed = 0;
    for (const auto& e : log.events) completed += e.completed();
    CHECK(completed == log.transitions.size());
    CHECK(log.transition_td.size() == log.transitions.size());
    for (const auto& t : log.transitions) CHECK(t.completed != t.previous);
}

TEST_CASE("noise only while exploring; learning in both phases") {
    const ExperimentConfig c = short_run(4000, 2000, 8);
    const RunLog log = run_experiment(c);
    CHECK_FALSE(log.noise_injection_steps.empty());
    for (long s : log.noise_injection_steps) CHECK(s < c.exploration_steps);

    ExperimentConfig seeded = short_run(3000, 0, 8);
    seeded.initial_weights = target_weights();
    const RunLog ex = run_experiment(seeded);
    double dw = 0.0;
    for (const auto& s : ex.steps) dw += s.dW;
    CHECK(dw > 0.0);

    seeded.learning = false;
    const RunLog frozen = run_experiment(seeded);
    CHECK(frozen.final_weights == target_weights());
}

TEST_CASE("target weights drive the target cycle without learning") {
    ExperimentConfig c = short_run(4000, 0, 21);
    c.initial_weights = target_weights();
    c.learning = false;
    const RunLog log = run_experiment(c);
    CHECK(follows_target(log, 0, 2));
    CHECK(log.reward_episodes >= 2);

    const auto summary = nlohmann::json::parse(summary_json(log));
    CHECK(summary["final_policy"]["G"] == "B");
    CHECK(summary["final_policy"]["B"] == "Y");
    CHECK(summary["final_policy"]["Y"] == "R");
    CHECK(summary["final_policy"]["R"] == "G");
}

TEST_CASE("policy helpers") {
    CHECK(target_cycle({1, 2, 3, 0, 1}) == std::vector<int>{1, 2, 3, 0});
    CHECK(target_cycle({0, 1, 2}) == std::vector<int>{0, 1, 2});
    CHECK(greedy_policy(target_weights()) == std::vector<int>{1, 2, 3, 0});
    CHECK(greedy_policy(Matrix::square(3)) == std::vector<int>{-1, -1, -1});
}

TEST_CASE("metric export") {
    const ExperimentConfig c = short_run(1500, 1000, 4);
    const RunLog log = run_experiment(c);
    const fs::path dir = scratch("export");
    export_metrics(log, dir.string(), &c);
    for (const char* f : {"steps.csv", "events.csv", "summary.json", "weights.txt", "layout.json", "config.txt"})
        CHECK(fs::exists(dir / f));

    const std::string steps = slurp(dir / "steps.csv");
    CHECK(steps.rfind("t,r,v,dW,intention,cos\n", 0) == 0);
    CHECK(lines(steps) == static_cast<std::size_t>(c.total_steps) + 1);

    // Cumulative reward rebuilt from the file matches the log exactly.
    std::istringstream is(steps);
    std::string line;
    std::getline(is, line);
    double cum = 0.0;
    std::size_t n = 0;
    bool exact = true;
    while (std::getline(is, line)) {
        const auto a = line.find(','), b = line.find(',', a + 1);
        cum += std::stod(line.substr(a + 1, b - a - 1));
        exact &= cum == log.cumulative_reward[n++];
    }
    CHECK(exact);

    CHECK(slurp(dir / "events.csv").rfind("behavior,t_on,t_off,cos_time\n", 0) == 0);
    const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
    CHECK(summary.contains("discovery_step"));
    CHECK(summary.contains("total_reward"));
    CHECK(summary.contains("final_policy"));
    const auto layout = nlohmann::json::parse(slurp(dir / "layout.json"));
    CHECK(layout.size() == 16);

    const fs::path empty = scratch("export_empty");
    export_metrics(run_experiment(short_run(0, 0)), empty.string());
    CHECK(lines(slurp(empty / "steps.csv")) == 1);
    CHECK(lines(slurp(empty / "events.csv")) == 1);
    fs::remove_all(dir);
    fs::remove_all(empty);
}

TEST_CASE("batch runs") {
    const ExperimentConfig c = short_run(1200, 1000, 30);
    const BatchResult one = run_batch(c, 1);
    REQUIRE(one.runs.size() == 1);
    REQUIRE(one.runs[0].log);
    const RunLog single = run_experiment(c);
    CHECK(one.mean_cumulative_reward == single.cumulative_reward);
    CHECK(one.runs[0].log->final_weights == single.final_weights);

    const BatchResult par = run_batch(c, 3, Execution::Parallel);
    const BatchResult ser = run_batch(c, 3, Execution::Serial);
    CHECK(par.failures() == 0);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(par.runs[i].seed == c.seed + i);
        CHECK(par.runs[i].log->final_weights == ser.runs[i].log->final_weights);
        CHECK(par.runs[i].log->transitions.size() == ser.runs[i].log->transitions.size());
    }
    CHECK(par.mean_abs_td == ser.mean_abs_td);

    const fs::path dir = scratch("batch");
    export_batch(par, dir.string(), c.exploration_steps, c.dt);
    CHECK(fs::exists(dir / "batch.csv"));
    CHECK(lines(slurp(dir / "seeds.csv")) == 4);
    fs::remove_all(dir);
}

TEST_CASE("non-finite state is reported with its step") {
    ExperimentConfig c = short_run(200, 0);
    Matrix w = Matrix::square(4);
    w(1, 0) = std::numeric_limits<double>::infinity();
    c.initial_weights = w;
    CHECK_THROWS_AS(run_experiment(c), std::exception);
}
