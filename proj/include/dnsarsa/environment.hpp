#pragma once

// Ring world: an agent turning on the spot at the centre of a ring of
// colored blocks, the synthetic camera that turns the blocks in view into a
// hue x column map, and the delayed reward for completing a target sequence
// of behaviors.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "dnsarsa/matrix.hpp"
#include "dnsarsa/perception.hpp"

namespace dnsarsa {

struct Block {
    double angle = 0.0;  ///< radians in [0, 2pi)
    int color = 0;
};

struct WorldConfig {
    std::size_t block_count = 16;
    std::size_t colors = 4;
    double fov = 2.0943951023931953;       ///< 120 deg
    double max_omega = 1.5707963267948966;  ///< |omega| is clamped to this
    double bearing_sigma = 0.06981317007977318;  ///< 4 deg, percept bump width
    double hue_sigma = 1.0;                 ///< percept bump width in hue bins
    double block_amplitude = 4.0;           ///< percept bump height
    /// Angular width a block occupies; neighbours must be at least this far apart.
    double block_angular_width() const { return 2.0 * bearing_sigma; }
};

void validate(const WorldConfig& c);

struct RingWorld {
    double heading = 0.0;  ///< radians in [0, 2pi)
    std::vector<Block> blocks;
    WorldConfig config;
};

/// Evenly spaced blocks; colors follow a seed-chosen permutation repeated
/// around the ring, so every color appears block_count / colors times and
/// same-colored blocks are evenly interleaved. Heading is drawn from the seed.
RingWorld reset(const WorldConfig& config, std::uint64_t seed);

/// wrap(angle) into [0, 2pi).
double wrap_angle(double a);
/// wrap(angle) into [-pi, pi).
double wrap_bearing(double a);

/// Bearing of a block relative to the heading, in [-pi, pi).
double bearing_of(const RingWorld& w, const Block& b);

/// Gaussian bump per block inside +-fov/2, centred on (hue row of its color,
/// column at bearing). Uses the world's fov, not geometry.fov.
Matrix render_percept(const RingWorld& w, const PerceptGeometry& g);

/// heading <- wrap(heading + clamp(omega) * dt)
void apply_motor(RingWorld& w, double omega, double dt);

/// Layout as text: [{"angle_deg": a, "color": "G"}, ...]
std::string layout_json(const RingWorld& w, const std::vector<std::string>& color_names);

struct RewardSchedule {
    std::vector<int> target;
    std::deque<int> history;  ///< last completed behaviors, at most target.size()
    double reward_value = 1.0;
    int reward_duration = 16;  ///< ticks
    int reward_steps_remaining = 0;
    long episodes = 0;

    static RewardSchedule make(std::vector<int> target, double value, int duration);
};

struct RewardTick {
    double r = 0.0;
    bool episode_started = false;
    bool episode_ended = false;  ///< last rewarded tick of an episode
};

/// Pushes the completed behavior (if any). When the history matches the
/// target a reward episode starts and the history is cut back to the
/// completing behavior, which may open the next occurrence. r = reward_value
/// on every tick while the episode lasts.
RewardTick step_reward(RewardSchedule& rs, std::optional<int> completed);

}  // namespace dnsarsa
