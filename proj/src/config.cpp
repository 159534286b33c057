#include "dnsarsa/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "dnsarsa/errors.hpp"
#include "dnsarsa/weights_io.hpp"

namespace dnsarsa {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(std::string_view v) {
    std::vector<std::string> out;
    while (true) {
        const auto comma = v.find(',');
        const auto item = trim(v.substr(0, comma));
        if (!item.empty()) out.emplace_back(item);
        if (comma == std::string_view::npos) break;
        v.remove_prefix(comma + 1);
    }
    return out;
}

double to_double(std::string_view key, std::string_view v) {
    double x = 0.0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size())
        throw ParseError("bad number for '" + std::string(key) + "': " + std::string(v));
    return x;
}

long to_long(std::string_view key, std::string_view v) {
    long x = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size())
        throw ParseError("bad integer for '" + std::string(key) + "': " + std::string(v));
    return x;
}

bool to_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ParseError("bad boolean for '" + std::string(key) + "': " + std::string(v));
}

struct Entry {
    std::string key;
    std::function<void(ExperimentConfig&, std::string_view)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

template <class Ref>
Entry real(std::string key, Ref ref) {
    return {key, [ref, key](ExperimentConfig& c, std::string_view v) { ref(c) = to_double(key, v); },
            [ref](const ExperimentConfig& c) { return format_double(ref(const_cast<ExperimentConfig&>(c))); }};
}

template <class T, class Ref>
Entry integer(std::string key, Ref ref) {
    return {key, [ref, key](ExperimentConfig& c, std::string_view v) { ref(c) = static_cast<T>(to_long(key, v)); },
            [ref](const ExperimentConfig& c) { return std::to_string(ref(const_cast<ExperimentConfig&>(c))); }};
}

template <class Ref>
Entry boolean(std::string key, Ref ref) {
    return {key, [ref, key](ExperimentConfig& c, std::string_view v) { ref(c) = to_bool(key, v); },
            [ref](const ExperimentConfig& c) { return std::string(ref(const_cast<ExperimentConfig&>(c)) ? "true" : "false"); }};
}

#define DNS_REF(expr) [](ExperimentConfig& c) -> auto& { return c.expr; }

void add_field(std::vector<Entry>& t, const std::string& prefix, int which) {
    auto field = [which](ExperimentConfig& c) -> FieldParams& {
        return which == 0 ? c.perception.percept : which == 1 ? c.perception.cos : c.perception.motor;
    };
    t.push_back(real(prefix + ".tau", [field](ExperimentConfig& c) -> double& { return field(c).tau; }));
    t.push_back(real(prefix + ".h", [field](ExperimentConfig& c) -> double& { return field(c).h; }));
    t.push_back(real(prefix + ".beta", [field](ExperimentConfig& c) -> double& { return field(c).sigmoid.beta; }));
    t.push_back(real(prefix + ".mu", [field](ExperimentConfig& c) -> double& { return field(c).sigmoid.mu; }));
    t.push_back(real(prefix + ".amp_exc", [field](ExperimentConfig& c) -> double& { return field(c).kernel.amp_exc; }));
    t.push_back(real(prefix + ".sigma_exc", [field](ExperimentConfig& c) -> double& { return field(c).kernel.sigma_exc; }));
    t.push_back(real(prefix + ".amp_inh", [field](ExperimentConfig& c) -> double& { return field(c).kernel.amp_inh; }));
    t.push_back(real(prefix + ".sigma_inh", [field](ExperimentConfig& c) -> double& { return field(c).kernel.sigma_inh; }));
    t.push_back(real(prefix + ".amp_global", [field](ExperimentConfig& c) -> double& { return field(c).kernel.amp_global; }));
    t.push_back(real(prefix + ".dx_rows", [field](ExperimentConfig& c) -> double& { return field(c).dx[0]; }));
    t.push_back(real(prefix + ".dx_cols", [field](ExperimentConfig& c) -> double& { return field(c).dx[1]; }));
}

const std::vector<Entry>& table() {
    static const std::vector<Entry> t = [] {
        std::vector<Entry> t;
        t.push_back(integer<std::uint64_t>("seed", DNS_REF(seed)));
        t.push_back(integer<long>("total_steps", DNS_REF(total_steps)));
        t.push_back(integer<long>("exploration_steps", DNS_REF(exploration_steps)));
        t.push_back(real("dt", DNS_REF(dt)));
        t.push_back(integer<std::size_t>("behaviors", DNS_REF(behaviors)));
        t.push_back({"colors",
                     [](ExperimentConfig& c, std::string_view v) { c.color_names = split_list(v); },
                     [](const ExperimentConfig& c) {
                         std::string s;
                         for (std::size_t i = 0; i < c.color_names.size(); ++i) s += (i ? "," : "") + c.color_names[i];
                         return s;
                     }});
        t.push_back({"target",
                     [](ExperimentConfig& c, std::string_view v) {
                         c.target.clear();
                         for (const auto& item : split_list(v)) c.target.push_back(color_index(c, item));
                     },
                     [](const ExperimentConfig& c) {
                         std::string s;
                         for (std::size_t i = 0; i < c.target.size(); ++i) {
                             const auto ti = static_cast<std::size_t>(c.target[i]);
                             s += (i ? "," : "") + (ti < c.color_names.size() ? c.color_names[ti] : std::to_string(c.target[i]));
                         }
                         return s;
                     }});
        t.push_back(boolean("learning", DNS_REF(learning)));
        t.push_back(real("noise_amplitude", DNS_REF(noise_amplitude)));
        t.push_back(real("reward_value", DNS_REF(reward_value)));
        t.push_back(integer<int>("reward_duration", DNS_REF(reward_duration)));
        t.push_back(boolean("reset_eligibility_on_reward", DNS_REF(reset_eligibility_on_reward)));
        t.push_back(boolean("record_trace", DNS_REF(record_trace)));
        t.push_back({"output_dir", [](ExperimentConfig& c, std::string_view v) { c.output_dir = std::string(v); },
                     [](const ExperimentConfig& c) { return c.output_dir; }});

        t.push_back(integer<std::size_t>("world.block_count", DNS_REF(world.block_count)));
        t.push_back(real("world.fov", DNS_REF(world.fov)));
        t.push_back(real("world.max_omega", DNS_REF(world.max_omega)));
        t.push_back(real("world.bearing_sigma", DNS_REF(world.bearing_sigma)));
        t.push_back(real("world.hue_sigma", DNS_REF(world.hue_sigma)));
        t.push_back(real("world.block_amplitude", DNS_REF(world.block_amplitude)));

        t.push_back(integer<std::size_t>("perception.hue_bins", DNS_REF(perception.geometry.hue_bins)));
        t.push_back(integer<std::size_t>("perception.columns", DNS_REF(perception.geometry.columns)));
        t.push_back(real("perception.ridge_percept", DNS_REF(perception.ridge_percept)));
        t.push_back(real("perception.ridge_cos", DNS_REF(perception.ridge_cos)));
        t.push_back(real("perception.ridge_hue_sigma", DNS_REF(perception.ridge_hue_sigma)));
        t.push_back(real("perception.percept_to_cos", DNS_REF(perception.percept_to_cos)));
        t.push_back(real("perception.center_window", DNS_REF(perception.center_window)));
        t.push_back(integer<std::size_t>("perception.motor_bins", DNS_REF(perception.motor_bins)));
        t.push_back(real("perception.percept_to_motor", DNS_REF(perception.percept_to_motor)));
        t.push_back(real("perception.motor_sigma", DNS_REF(perception.motor_sigma)));
        t.push_back(real("perception.k_p", DNS_REF(perception.k_p)));
        t.push_back(real("perception.omega_max", DNS_REF(perception.omega_max)));
        t.push_back(real("perception.omega_search", DNS_REF(perception.omega_search)));
        add_field(t, "percept_field", 0);
        add_field(t, "cos_field", 1);
        add_field(t, "motor_field", 2);

        t.push_back(real("nodes.tau_int", DNS_REF(nodes.tau_int)));
        t.push_back(real("nodes.tau_cos", DNS_REF(nodes.tau_cos)));
        t.push_back(real("nodes.h", DNS_REF(nodes.h_node)));
        t.push_back(real("nodes.c_plus_int", DNS_REF(nodes.c_plus_int)));
        t.push_back(real("nodes.c_minus_int", DNS_REF(nodes.c_minus_int)));
        t.push_back(real("nodes.c_cos_int", DNS_REF(nodes.c_cos_int)));
        t.push_back(real("nodes.c_val_int", DNS_REF(nodes.c_val_int)));
        t.push_back(real("nodes.c_plus_cos", DNS_REF(nodes.c_plus_cos)));
        t.push_back(real("nodes.c_int_cos", DNS_REF(nodes.c_int_cos)));
        t.push_back(real("nodes.c_input_cos", DNS_REF(nodes.c_input_cos)));
        t.push_back(real("nodes.c_minus_cos", DNS_REF(nodes.c_minus_cos)));
        t.push_back(real("nodes.tie_bias", DNS_REF(nodes.tie_bias)));
        t.push_back(real("nodes.beta", DNS_REF(node_sigmoid.beta)));
        t.push_back(real("nodes.mu", DNS_REF(node_sigmoid.mu)));
        t.push_back(real("value.epsilon", DNS_REF(value_readout.epsilon)));
        t.push_back(boolean("value.mask_completed", DNS_REF(value_readout.mask_completed)));

        t.push_back({"learner.sa_form",
                     [](ExperimentConfig& c, std::string_view v) {
                         if (v == "gated") c.learner.sa_form = SaForm::Gated;
                         else if (v == "printed") c.learner.sa_form = SaForm::Printed;
                         else throw ParseError("learner.sa_form must be gated or printed");
                     },
                     [](const ExperimentConfig& c) {
                         return std::string(c.learner.sa_form == SaForm::Gated ? "gated" : "printed");
                     }});
        t.push_back(real("learner.sa_gain", DNS_REF(learner.sa_gain)));
        t.push_back(real("learner.sa_threshold", DNS_REF(learner.sa_threshold)));
        t.push_back(boolean("learner.sa_exclude_self", DNS_REF(learner.sa_exclude_self)));
        t.push_back(real("learner.tau_tp", DNS_REF(learner.tau_tp)));
        t.push_back(boolean("learner.tp_exact", DNS_REF(learner.tp_exact)));
        t.push_back(real("learner.alpha_et", DNS_REF(learner.alpha_et)));
        t.push_back(real("learner.beta_et", DNS_REF(learner.beta_et)));
        t.push_back(real("learner.tau_u", DNS_REF(learner.tau_u)));
        t.push_back(real("learner.tau_o", DNS_REF(learner.tau_o)));
        t.push_back(real("learner.gamma", DNS_REF(learner.gamma)));
        t.push_back(real("learner.vo_threshold", DNS_REF(learner.vo_threshold)));
        t.push_back(real("learner.tau_v", DNS_REF(learner.tau_v)));
        t.push_back(real("learner.alpha_w", DNS_REF(learner.alpha_w)));
        t.push_back({"learner.gate",
                     [](ExperimentConfig& c, std::string_view v) {
                         if (v == "none") c.learner.gate = WeightGate::None;
                         else if (v == "shunt") c.learner.gate = WeightGate::Shunt;
                         else if (v == "sa") c.learner.gate = WeightGate::Sa;
                         else throw ParseError("learner.gate must be none, shunt or sa");
                     },
                     [](const ExperimentConfig& c) {
                         switch (c.learner.gate) {
                             case WeightGate::Shunt: return std::string("shunt");
                             case WeightGate::Sa: return std::string("sa");
                             default: return std::string("none");
                         }
                     }});
        t.push_back(real("learner.w_max", DNS_REF(learner.w_max)));
        t.push_back({"initial_weights",
                     [](ExperimentConfig& c, std::string_view v) {
                         if (v.empty() || v == "none") c.initial_weights.reset();
                         else c.initial_weights = load_weights(std::string(v));
                     },
                     [](const ExperimentConfig&) { return std::string("none"); }});
        return t;
    }();
    return t;
}

#undef DNS_REF

}  // namespace

double ExperimentConfig::min_tau() const {
    double m = std::min({nodes.tau_int, nodes.tau_cos, perception.percept.tau, perception.cos.tau,
                         perception.motor.tau, learner.tau_tp, learner.tau_u, learner.tau_o, learner.tau_v});
    return m;
}

void sync_derived(ExperimentConfig& c) {
    c.perception.geometry.behaviors = c.behaviors;
    c.perception.geometry.fov = c.world.fov;
    c.perception.sync_shapes();
    c.world.colors = c.behaviors;
    c.world.max_omega = std::max(c.world.max_omega, c.perception.omega_max);
    while (c.color_names.size() < c.behaviors) c.color_names.push_back(std::to_string(c.color_names.size()));
    c.color_names.resize(c.behaviors);
}

void validate(const ExperimentConfig& c) {
    if (!(c.dt > 0.0)) throw ConfigError("dt must be positive");
    if (c.total_steps < 0 || c.exploration_steps < 0) throw ConfigError("step counts must be non-negative");
    if (c.exploration_steps > c.total_steps) throw ConfigError("exploration_steps exceeds total_steps");
    if (c.dt > c.min_tau() / 3.0 + 1e-15) throw ConfigError("dt exceeds min tau / 3");
    if (c.behaviors == 0 || c.behaviors > 16) throw ConfigError("behavior count must be in [1, 16]");
    if (c.target.empty()) throw ConfigError("target sequence must not be empty");
    for (int t : c.target)
        if (t < 0 || static_cast<std::size_t>(t) >= c.behaviors) throw ConfigError("target entry out of range");
    if (c.noise_amplitude < 0.0) throw ConfigError("noise amplitude must be non-negative");
    if (c.reward_duration < 1) throw ConfigError("reward duration must be at least one tick");
    if (c.initial_weights && (c.initial_weights->rows() != c.behaviors || c.initial_weights->cols() != c.behaviors))
        throw ConfigError("initial weights do not match behavior count");
    validate(c.world);
    validate(c.perception, c.dt);
    validate(c.nodes, c.dt);
    validate(c.learner, c.dt);
    if (c.perception.geometry.behaviors != c.behaviors || c.world.colors != c.behaviors)
        throw ConfigError("behavior count not propagated; call sync_derived");
}

int color_index(const ExperimentConfig& c, std::string_view name) {
    for (std::size_t i = 0; i < c.color_names.size(); ++i)
        if (c.color_names[i] == name) return static_cast<int>(i);
    int x = 0;
    const auto r = std::from_chars(name.data(), name.data() + name.size(), x);
    if (r.ec == std::errc() && r.ptr == name.data() + name.size()) return x;
    throw ParseError("unknown color '" + std::string(name) + "'");
}

void apply_setting(ExperimentConfig& c, std::string_view key, std::string_view value) {
    const auto& t = table();
    const auto it = std::find_if(t.begin(), t.end(), [&](const Entry& e) { return e.key == key; });
    if (it == t.end()) throw ParseError("unknown config key '" + std::string(key) + "'");
    it->set(c, trim(value));
}

ExperimentConfig parse_config(std::istream& is) {
    ExperimentConfig c;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::string_view s(line);
        if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
        s = trim(s);
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string_view::npos) throw ParseError("expected key = value", lineno);
        try {
            apply_setting(c, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
        } catch (const ParseError& e) {
            throw ParseError(e.what(), lineno);
        }
    }
    sync_derived(c);
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config " + path);
    return parse_config(is);
}

void write_config(std::ostream& os, const ExperimentConfig& c) {
    for (const Entry& e : table())
        if (e.key != "initial_weights") os << e.key << " = " << e.get(c) << '\n';
}

}  // namespace dnsarsa
