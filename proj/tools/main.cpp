#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "dnsarsa/config.hpp"
#include "dnsarsa/errors.hpp"
#include "dnsarsa/experiment.hpp"
#include "dnsarsa/oracle.hpp"
#include "dnsarsa/weights_io.hpp"

namespace {

struct CommonOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<long> steps;
    std::optional<long> explore_steps;
    bool no_learning = false;
    std::vector<std::string> sets;
};

void add_common(CLI::App* app, CommonOptions& o) {
    app->add_option("--config", o.config, "key = value config file");
    app->add_option("--seed", o.seed, "random seed");
    app->add_option("--out", o.out, "output directory");
    app->add_option("--steps", o.steps, "total steps");
    app->add_option("--explore-steps", o.explore_steps, "exploration steps");
    app->add_flag("--no-learning", o.no_learning, "freeze the Q-weights");
    app->add_option("--set", o.sets, "override one setting, key=value (repeatable)");
}

dnsarsa::ExperimentConfig build_config(const CommonOptions& o) {
    dnsarsa::ExperimentConfig c = o.config.empty() ? dnsarsa::ExperimentConfig{} : dnsarsa::load_config(o.config);
    for (const std::string& s : o.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw dnsarsa::ParseError("--set expects key=value: " + s);
        dnsarsa::apply_setting(c, s.substr(0, eq), s.substr(eq + 1));
    }
    if (o.seed) c.seed = *o.seed;
    if (o.steps) {
        c.total_steps = *o.steps;
        if (!o.explore_steps && c.exploration_steps > c.total_steps) c.exploration_steps = c.total_steps;
    }
    if (o.explore_steps) c.exploration_steps = *o.explore_steps;
    if (o.no_learning) c.learning = false;
    if (!o.out.empty()) c.output_dir = o.out;
    dnsarsa::sync_derived(c);
    dnsarsa::validate(c);
    return c;
}

void print_run(const dnsarsa::RunLog& log) {
    const long n = static_cast<long>(log.steps.size());
    std::printf("seed %llu: %zu behaviors (%zu exploring), %ld reward episodes, discovery %s, total reward %.3f\n",
                static_cast<unsigned long long>(log.seed), log.transitions.size(),
                log.completed_before(log.exploration_steps), log.reward_episodes,
                log.discovery_step ? std::to_string(*log.discovery_step).c_str() : "none", log.total_reward());
    std::printf("mean |TD| per transition: exploration %.4f, exploitation %.4f\n",
                dnsarsa::mean_abs_transition_td(log, 0, log.exploration_steps),
                dnsarsa::mean_abs_transition_td(log, log.exploration_steps, n));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DN-SARSA(lambda) colour-sequence experiments"};
    app.require_subcommand(1);

    CommonOptions run_o, batch_o, replay_o, cmp_o;
    std::size_t n_seeds = 13;
    bool serial = false;
    std::string weights;
    bool scripted = false;
    std::size_t transitions = 200;

    auto* run = app.add_subcommand("run", "single closed-loop run");
    add_common(run, run_o);
    auto* batch = app.add_subcommand("batch", "independent runs over consecutive seeds");
    add_common(batch, batch_o);
    batch->add_option("--seeds", n_seeds, "number of seeds")->check(CLI::PositiveNumber);
    batch->add_flag("--serial", serial, "run seeds one after another");
    auto* replay = app.add_subcommand("replay", "load weights and run in exploitation mode");
    add_common(replay, replay_o);
    replay->add_option("--weights", weights, "weights file")->required();
    auto* cmp = app.add_subcommand("compare", "compare DN weight changes with tabular SARSA(lambda)");
    add_common(cmp, cmp_o);
    cmp->add_flag("--scripted", scripted, "use the scripted 3-behavior world instead of a closed-loop run");
    cmp->add_option("--transitions", transitions, "scripted transitions");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            const auto cfg = build_config(run_o);
            const auto log = dnsarsa::run_experiment(cfg);
            dnsarsa::export_metrics(log, cfg.output_dir, &cfg);
            print_run(log);
        } else if (*batch) {
            const auto cfg = build_config(batch_o);
            const auto res = dnsarsa::run_batch(cfg, n_seeds, serial ? dnsarsa::Execution::Serial
                                                                      : dnsarsa::Execution::Parallel);
            dnsarsa::export_batch(res, cfg.output_dir, cfg.exploration_steps, cfg.dt);
            for (const auto& o : res.runs) {
                if (o.log) print_run(*o.log);
                else std::printf("seed %llu: FAILED %s\n", static_cast<unsigned long long>(o.seed), o.error.c_str());
            }
            if (res.failures() > 0) return 2;
        } else if (*replay) {
            auto cfg = build_config(replay_o);
            cfg.initial_weights = dnsarsa::load_weights(weights, cfg.behaviors);
            cfg.exploration_steps = 0;
            if (!replay_o.steps) cfg.total_steps = 10000;
            const auto log = dnsarsa::run_experiment(cfg);
            dnsarsa::export_metrics(log, cfg.output_dir, &cfg);
            print_run(log);
        } else if (*cmp) {
            const auto cfg = build_config(cmp_o);
            const auto report = scripted ? dnsarsa::compare_scripted(cfg, transitions)
                                         : dnsarsa::compare(dnsarsa::run_experiment(cfg), cfg);
            dnsarsa::write_report(std::cout, report);
            return report.passed ? 0 : 3;
        }
    } catch (const dnsarsa::DivergenceError& e) {
        std::cerr << "divergence: " << e.what() << '\n';
        return 4;
    } catch (const dnsarsa::ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
