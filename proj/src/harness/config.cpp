#include "crl/harness/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "crl/replay/samplers.hpp"

namespace crl {

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed) {
    auto h = seed;
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string to_string(Variant v) {
    switch (v) {
        case Variant::nce: return "nce";
        case Variant::cpc: return "cpc";
        case Variant::c_learning: return "c_learning";
        case Variant::nce_plus_c: return "nce_plus_c";
        case Variant::gcbc: return "gcbc";
        case Variant::model_based: return "model_based";
    }
    return "nce";
}

Variant parse_variant(const std::string& text) {
    for (auto v : {Variant::nce, Variant::cpc, Variant::c_learning, Variant::nce_plus_c, Variant::gcbc,
                   Variant::model_based})
        if (to_string(v) == text) return v;
    throw ConfigError("unknown agent variant '" + text + "'");
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    if (v == "inf" || v == "+inf" || v == "infinity") return std::numeric_limits<double>::infinity();
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || *end != '\0' || std::isnan(x)) throw ConfigError(key + ": expected a number, got '" + v + "'");
    return x;
}

std::int64_t parse_int(const std::string& key, const std::string& v) {
    std::int64_t x = 0;
    std::string digits;
    for (char c : v)
        if (c != '_' && c != ',') digits += c;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), x);
    if (digits.empty() || ec != std::errc() || ptr != digits.data() + digits.size())
        throw ConfigError(key + ": expected an integer, got '" + v + "'");
    return x;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    std::uint64_t x = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (v.empty() || ec != std::errc() || ptr != v.data() + v.size())
        throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
    return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::vector<int> parse_sizes(const std::string& key, const std::string& v) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(static_cast<int>(parse_int(key, item)));
    }
    return out;
}

std::string fmt_double(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string fmt_sizes(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

struct Field {
    const char* key;
    std::function<void(ExperimentConfig&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        {"seed", [](auto& c, auto& v) { c.seed = parse_u64("seed", v); },
         [](auto& c) { return std::to_string(c.seed); }},
        {"env.name", [](auto& c, auto& v) { c.env.name = v; }, [](auto& c) { return c.env.name; }},
        {"env.gamma", [](auto& c, auto& v) { c.env.gamma = parse_double("env.gamma", v); },
         [](auto& c) { return fmt_double(c.env.gamma); }},
        {"env.horizon", [](auto& c, auto& v) { c.env.horizon = static_cast<int>(parse_int("env.horizon", v)); },
         [](auto& c) { return std::to_string(c.env.horizon); }},
        {"env.success_radius", [](auto& c, auto& v) { c.env.success_radius = parse_double("env.success_radius", v); },
         [](auto& c) { return fmt_double(c.env.success_radius); }},
        {"env.cell_size", [](auto& c, auto& v) { c.env.cell_size = parse_double("env.cell_size", v); },
         [](auto& c) { return fmt_double(c.env.cell_size); }},
        {"env.max_step", [](auto& c, auto& v) { c.env.max_step = parse_double("env.max_step", v); },
         [](auto& c) { return fmt_double(c.env.max_step); }},
        {"env.start_noise", [](auto& c, auto& v) { c.env.start_noise = parse_double("env.start_noise", v); },
         [](auto& c) { return fmt_double(c.env.start_noise); }},
        {"agent.variant", [](auto& c, auto& v) { c.agent.variant = parse_variant(v); },
         [](auto& c) { return to_string(c.agent.variant); }},
        {"agent.repr_dim", [](auto& c, auto& v) { c.agent.repr_dim = static_cast<int>(parse_int("agent.repr_dim", v)); },
         [](auto& c) { return std::to_string(c.agent.repr_dim); }},
        {"agent.hidden", [](auto& c, auto& v) { c.agent.hidden = parse_sizes("agent.hidden", v); },
         [](auto& c) { return fmt_sizes(c.agent.hidden); }},
        {"agent.batch_size",
         [](auto& c, auto& v) { c.agent.batch_size = static_cast<int>(parse_int("agent.batch_size", v)); },
         [](auto& c) { return std::to_string(c.agent.batch_size); }},
        {"agent.lr", [](auto& c, auto& v) { c.agent.learning_rate = parse_double("agent.lr", v); },
         [](auto& c) { return fmt_double(c.agent.learning_rate); }},
        {"agent.goal_source", [](auto& c, auto& v) { c.agent.goal_source = v; },
         [](auto& c) { return c.agent.goal_source; }},
        {"agent.entropy_coeff", [](auto& c, auto& v) { c.agent.entropy_coeff = parse_double("agent.entropy_coeff", v); },
         [](auto& c) { return fmt_double(c.agent.entropy_coeff); }},
        {"agent.min_std", [](auto& c, auto& v) { c.agent.min_std = parse_double("agent.min_std", v); },
         [](auto& c) { return fmt_double(c.agent.min_std); }},
        {"agent.cpc_reg_coeff", [](auto& c, auto& v) { c.agent.cpc_reg_coeff = parse_double("agent.cpc_reg_coeff", v); },
         [](auto& c) { return fmt_double(c.agent.cpc_reg_coeff); }},
        {"agent.td_weight_clip",
         [](auto& c, auto& v) { c.agent.td_weight_clip = parse_double("agent.td_weight_clip", v); },
         [](auto& c) { return fmt_double(c.agent.td_weight_clip); }},
        {"agent.density_variance_floor",
         [](auto& c, auto& v) { c.agent.density_variance_floor = parse_double("agent.density_variance_floor", v); },
         [](auto& c) { return fmt_double(c.agent.density_variance_floor); }},
        {"agent.filter_enabled",
         [](auto& c, auto& v) { c.agent.filter_enabled = parse_bool("agent.filter_enabled", v); },
         [](auto& c) { return std::string(c.agent.filter_enabled ? "true" : "false"); }},
        {"agent.filter_epsilon",
         [](auto& c, auto& v) { c.agent.filter_epsilon = parse_double("agent.filter_epsilon", v); },
         [](auto& c) { return fmt_double(c.agent.filter_epsilon); }},
        {"schedule.initial_random_steps",
         [](auto& c, auto& v) { c.schedule.initial_random_steps = parse_int("schedule.initial_random_steps", v); },
         [](auto& c) { return std::to_string(c.schedule.initial_random_steps); }},
        {"schedule.train_collect_interval",
         [](auto& c, auto& v) { c.schedule.train_collect_interval = parse_int("schedule.train_collect_interval", v); },
         [](auto& c) { return std::to_string(c.schedule.train_collect_interval); }},
        {"schedule.samples_per_insert",
         [](auto& c, auto& v) { c.schedule.samples_per_insert = parse_double("schedule.samples_per_insert", v); },
         [](auto& c) { return fmt_double(c.schedule.samples_per_insert); }},
        {"schedule.total_env_steps",
         [](auto& c, auto& v) { c.schedule.total_env_steps = parse_int("schedule.total_env_steps", v); },
         [](auto& c) { return std::to_string(c.schedule.total_env_steps); }},
        {"schedule.eval_interval",
         [](auto& c, auto& v) { c.schedule.eval_interval = parse_int("schedule.eval_interval", v); },
         [](auto& c) { return std::to_string(c.schedule.eval_interval); }},
        {"schedule.eval_episodes",
         [](auto& c, auto& v) { c.schedule.eval_episodes = static_cast<int>(parse_int("schedule.eval_episodes", v)); },
         [](auto& c) { return std::to_string(c.schedule.eval_episodes); }},
        {"schedule.checkpoint_interval",
         [](auto& c, auto& v) { c.schedule.checkpoint_interval = parse_int("schedule.checkpoint_interval", v); },
         [](auto& c) { return std::to_string(c.schedule.checkpoint_interval); }},
        {"schedule.buffer_capacity",
         [](auto& c, auto& v) { c.schedule.buffer_capacity = parse_int("schedule.buffer_capacity", v); },
         [](auto& c) { return std::to_string(c.schedule.buffer_capacity); }},
        {"schedule.max_rejections",
         [](auto& c, auto& v) {
             c.schedule.max_rejections = static_cast<int>(parse_int("schedule.max_rejections", v));
         },
         [](auto& c) { return std::to_string(c.schedule.max_rejections); }},
        {"schedule.eval_workers",
         [](auto& c, auto& v) { c.schedule.eval_workers = static_cast<int>(parse_int("schedule.eval_workers", v)); },
         [](auto& c) { return std::to_string(c.schedule.eval_workers); }},
        {"schedule.log_interval",
         [](auto& c, auto& v) { c.schedule.log_interval = parse_int("schedule.log_interval", v); },
         [](auto& c) { return std::to_string(c.schedule.log_interval); }},
        {"offline.lambda", [](auto& c, auto& v) { c.offline.lambda = parse_double("offline.lambda", v); },
         [](auto& c) { return fmt_double(c.offline.lambda); }},
        {"offline.num_critics",
         [](auto& c, auto& v) { c.offline.num_critics = static_cast<int>(parse_int("offline.num_critics", v)); },
         [](auto& c) { return std::to_string(c.offline.num_critics); }},
        {"offline.dataset", [](auto& c, auto& v) { c.offline.dataset = v; },
         [](auto& c) { return c.offline.dataset; }},
        {"offline.gradient_steps",
         [](auto& c, auto& v) { c.offline.gradient_steps = parse_int("offline.gradient_steps", v); },
         [](auto& c) { return std::to_string(c.offline.gradient_steps); }},
        {"offline.goal_source", [](auto& c, auto& v) { c.offline.goal_source = v; },
         [](auto& c) { return c.offline.goal_source; }},
    };
    return table;
}

}  // namespace

void ExperimentConfig::set(const std::string& key, const std::string& value) {
    for (const auto& f : fields())
        if (key == f.key) return f.set(*this, value);
    throw ConfigError("unknown config key '" + key + "'");
}

std::vector<std::string> ExperimentConfig::keys() {
    std::vector<std::string> out;
    for (const auto& f : fields()) out.emplace_back(f.key);
    return out;
}

std::vector<std::string> ExperimentConfig::problems() const {
    std::vector<std::string> p;
    auto need = [&](bool ok, const std::string& msg) {
        if (!ok) p.push_back(msg);
    };
    need(!env.name.empty(), "env.name must not be empty");
    need(env.gamma > 0.0 && env.gamma < 1.0, "env.gamma must be in (0, 1)");
    need(env.horizon >= 1, "env.horizon must be >= 1");
    need(env.success_radius >= 0.0, "env.success_radius must be >= 0");
    need(env.cell_size > 0.0, "env.cell_size must be > 0");
    need(env.max_step > 0.0 && env.max_step <= env.cell_size, "env.max_step must be in (0, env.cell_size]");
    need(env.start_noise >= 0.0, "env.start_noise must be >= 0");
    need(agent.repr_dim >= 1, "agent.repr_dim must be >= 1");
    need(!agent.hidden.empty(), "agent.hidden must list at least one layer");
    for (int h : agent.hidden) need(h >= 1, "agent.hidden sizes must be >= 1");
    need(agent.batch_size >= 2, "agent.batch_size must be >= 2");
    need(agent.learning_rate > 0.0, "agent.lr must be > 0");
    try {
        ActorGoalSource::parse(agent.goal_source);
    } catch (const ConfigError& e) {
        p.push_back(std::string("agent.goal_source: ") + e.what());
    }
    need(agent.entropy_coeff >= 0.0, "agent.entropy_coeff must be >= 0");
    need(agent.min_std > 0.0, "agent.min_std must be > 0");
    need(agent.cpc_reg_coeff >= 0.0, "agent.cpc_reg_coeff must be >= 0");
    need(agent.td_weight_clip > 0.0, "agent.td_weight_clip must be > 0");
    need(agent.density_variance_floor > 0.0, "agent.density_variance_floor must be > 0");
    need(agent.filter_epsilon > 0.0, "agent.filter_epsilon must be > 0");
    need(schedule.initial_random_steps >= 0, "schedule.initial_random_steps must be >= 0");
    need(schedule.train_collect_interval >= 1, "schedule.train_collect_interval must be >= 1");
    need(schedule.samples_per_insert > 0.0, "schedule.samples_per_insert must be > 0");
    need(schedule.total_env_steps >= 0, "schedule.total_env_steps must be >= 0");
    need(schedule.eval_interval >= 1, "schedule.eval_interval must be >= 1");
    need(schedule.eval_episodes >= 1, "schedule.eval_episodes must be >= 1");
    need(schedule.checkpoint_interval >= 0, "schedule.checkpoint_interval must be >= 0");
    need(schedule.buffer_capacity >= env.horizon, "schedule.buffer_capacity must hold at least one episode");
    need(schedule.max_rejections >= 0, "schedule.max_rejections must be >= 0");
    need(schedule.eval_workers >= 1, "schedule.eval_workers must be >= 1");
    need(schedule.log_interval >= 1, "schedule.log_interval must be >= 1");
    need(offline.lambda >= 0.0 && offline.lambda <= 1.0, "offline.lambda must be in [0, 1]");
    need(offline.num_critics >= 1, "offline.num_critics must be >= 1");
    need(offline.gradient_steps >= 0, "offline.gradient_steps must be >= 0");
    try {
        ActorGoalSource::parse(offline.goal_source);
    } catch (const ConfigError& e) {
        p.push_back(std::string("offline.goal_source: ") + e.what());
    }
    return p;
}

void ExperimentConfig::validate() const {
    const auto p = problems();
    if (p.empty()) return;
    std::string msg = "invalid config:";
    for (const auto& s : p) msg += "\n  - " + s;
    throw ConfigError(msg);
}

std::string ExperimentConfig::to_text() const {
    std::string out;
    for (const auto& f : fields()) out += std::string(f.key) + " = " + f.get(*this) + "\n";
    return out;
}

std::uint64_t ExperimentConfig::hash() const {
    const std::string text = to_text();
    return fnv1a64(text.data(), text.size());
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
    ExperimentConfig cfg;
    std::vector<std::string> errors;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(lineno) + ": expected 'key = value'");
            continue;
        }
        try {
            cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            errors.push_back("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (!errors.empty()) {
        std::string msg = "invalid config:";
        for (const auto& s : errors) msg += "\n  - " + s;
        throw ConfigError(msg);
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

}  // namespace crl
