#include "dnsarsa/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "dnsarsa/errors.hpp"

namespace dnsarsa {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

void validate(const WorldConfig& c) {
    if (c.colors == 0 || c.block_count == 0) throw ConfigError("world needs blocks and colors");
    if (c.block_count % c.colors != 0) throw ConfigError("block count must be divisible by color count");
    if (kTwoPi / static_cast<double>(c.block_count) < c.block_angular_width())
        throw ConfigError("blocks do not fit on the ring at the requested width");
    if (!(c.fov > 0.0) || c.fov >= kTwoPi) throw ConfigError("field of view must be in (0, 2pi)");
    if (!(c.max_omega > 0.0)) throw ConfigError("max omega must be positive");
    if (!(c.bearing_sigma > 0.0) || !(c.hue_sigma > 0.0)) throw ConfigError("percept widths must be positive");
}

double wrap_angle(double a) {
    a = std::fmod(a, kTwoPi);
    if (a < 0.0) a += kTwoPi;
    if (a >= kTwoPi) a = 0.0;
    return a;
}

double wrap_bearing(double a) { return wrap_angle(a + std::numbers::pi) - std::numbers::pi; }

RingWorld reset(const WorldConfig& config, std::uint64_t seed) {
    validate(config);
    std::mt19937_64 rng(seed);
    std::vector<int> perm(config.colors);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);

    RingWorld w;
    w.config = config;
    w.blocks.reserve(config.block_count);
    const double spacing = kTwoPi / static_cast<double>(config.block_count);
    for (std::size_t k = 0; k < config.block_count; ++k)
        w.blocks.push_back({static_cast<double>(k) * spacing, perm[k % config.colors]});
    w.heading = wrap_angle(std::uniform_real_distribution<double>(0.0, kTwoPi)(rng));
    return w;
}

double bearing_of(const RingWorld& w, const Block& b) { return wrap_bearing(b.angle - w.heading); }

Matrix render_percept(const RingWorld& w, const PerceptGeometry& g) {
    Matrix map(g.hue_bins, g.columns, 0.0);
    const WorldConfig& c = w.config;
    const double col_width = c.fov / static_cast<double>(g.columns);
    const double sc = c.bearing_sigma / col_width;
    const double sh = c.hue_sigma;
    const auto h = static_cast<double>(g.hue_bins);
    for (const Block& b : w.blocks) {
        const double bearing = bearing_of(w, b);
        if (std::abs(bearing) > 0.5 * c.fov) continue;
        const double col = (bearing / c.fov + 0.5) * static_cast<double>(g.columns) - 0.5;
        const auto row = static_cast<double>(g.hue_row(static_cast<std::size_t>(b.color)));
        for (std::size_t r = 0; r < g.hue_bins; ++r) {
            double dr = std::abs(static_cast<double>(r) - row);
            dr = std::min(dr, h - dr);
            const double wr = std::exp(-dr * dr / (2.0 * sh * sh));
            if (wr < 1e-6) continue;
            for (std::size_t p = 0; p < g.columns; ++p) {
                const double dc = static_cast<double>(p) - col;
                map(r, p) += c.block_amplitude * wr * std::exp(-dc * dc / (2.0 * sc * sc));
            }
        }
    }
    return map;
}

void apply_motor(RingWorld& w, double omega, double dt) {
    const double m = w.config.max_omega;
    w.heading = wrap_angle(w.heading + std::clamp(omega, -m, m) * dt);
}

std::string layout_json(const RingWorld& w, const std::vector<std::string>& color_names) {
    std::ostringstream os;
    os.precision(17);
    os << "[";
    for (std::size_t i = 0; i < w.blocks.size(); ++i) {
        const Block& b = w.blocks[i];
        const auto ci = static_cast<std::size_t>(b.color);
        os << (i ? ",\n " : "") << "{\"angle_deg\": " << b.angle * 180.0 / std::numbers::pi << ", \"color\": \""
           << (ci < color_names.size() ? color_names[ci] : std::to_string(b.color)) << "\"}";
    }
    os << "]\n";
    return os.str();
}

RewardSchedule RewardSchedule::make(std::vector<int> target, double value, int duration) {
    if (target.empty()) throw ConfigError("reward target must not be empty");
    if (duration < 1) throw ConfigError("reward duration must be at least one tick");
    RewardSchedule rs;
    rs.target = std::move(target);
    rs.reward_value = value;
    rs.reward_duration = duration;
    return rs;
}

RewardTick step_reward(RewardSchedule& rs, std::optional<int> completed) {
    RewardTick tick;
    if (completed) {
        rs.history.push_back(*completed);
        while (rs.history.size() > rs.target.size()) rs.history.pop_front();
        if (rs.history.size() == rs.target.size() && std::equal(rs.history.begin(), rs.history.end(), rs.target.begin())) {
            rs.reward_steps_remaining = rs.reward_duration;
            rs.history.erase(rs.history.begin(), rs.history.end() - 1);
            ++rs.episodes;
            tick.episode_started = true;
        }
    }
    if (rs.reward_steps_remaining > 0) {
        tick.r = rs.reward_value;
        --rs.reward_steps_remaining;
        tick.episode_ended = rs.reward_steps_remaining == 0;
    }
    return tick;
}

}  // namespace dnsarsa
