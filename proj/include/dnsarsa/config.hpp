#pragma once

// Flat experiment configuration. Every field has a default, so an empty
// config file reproduces the reference color-sequence experiment.
//
// File format: one "key = value" per line, '#' starts a comment. Lists are
// comma-separated (target = G,B,Y,R,G). Unknown keys are an error.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dnsarsa/behavior.hpp"
#include "dnsarsa/environment.hpp"
#include "dnsarsa/learner.hpp"
#include "dnsarsa/matrix.hpp"
#include "dnsarsa/perception.hpp"

namespace dnsarsa {

struct ExperimentConfig {
    std::uint64_t seed = 1;
    long total_steps = 100000;
    long exploration_steps = 50000;
    double dt = 1.0 / 32.0;
    std::size_t behaviors = 4;
    std::vector<std::string> color_names{"R", "G", "B", "Y"};
    std::vector<int> target{1, 2, 3, 0, 1};  ///< G, B, Y, R, G

    bool learning = true;
    double noise_amplitude = 1.0;  ///< uniform [0, A] added to value read-outs while exploring
    double reward_value = 1.0;
    int reward_duration = 16;
    bool reset_eligibility_on_reward = true;

    WorldConfig world;
    PerceptionParams perception = PerceptionParams::defaults();
    NodeCoefficients nodes;
    SigmoidParams node_sigmoid;
    ValueReadout value_readout;
    LearnerParams learner;

    std::optional<Matrix> initial_weights;
    bool record_trace = false;  ///< keep per-step node outputs in the RunLog
    std::string output_dir = "out";

    /// Minimum time constant over every dynamical element.
    double min_tau() const;
};

/// Throws ConfigError on any inconsistency (shapes, dt > min tau / 3,
/// exploration_steps > total_steps, target out of range, ...).
void validate(const ExperimentConfig& c);

/// Brings derived shapes (perception grid, colors) in line with `behaviors`.
void sync_derived(ExperimentConfig& c);

/// Applies one key = value setting. Throws ParseError on unknown key or bad value.
void apply_setting(ExperimentConfig& c, std::string_view key, std::string_view value);

ExperimentConfig parse_config(std::istream& is);
ExperimentConfig load_config(const std::string& path);
void write_config(std::ostream& os, const ExperimentConfig& c);

/// Color name -> index, also accepting plain integers.
int color_index(const ExperimentConfig& c, std::string_view name);

}  // namespace dnsarsa
