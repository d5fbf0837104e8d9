#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "crl/numcore/types.hpp"

namespace crl {

enum class Variant { nce, cpc, c_learning, nce_plus_c, gcbc, model_based };

std::string to_string(Variant v);
Variant parse_variant(const std::string& text);

struct EnvConfig {
    /// Built-in maze name (empty5, spiral11, nine_room) or "file:<path>".
    std::string name = "empty5";
    double gamma = 0.99;
    int horizon = 50;
    double success_radius = 0.5;
    double cell_size = 1.0;
    double max_step = 1.0;
    double start_noise = 0.0;
};

struct AgentConfig {
    Variant variant = Variant::nce;
    int repr_dim = 64;
    std::vector<int> hidden = {256, 256};
    int batch_size = 256;
    double learning_rate = 3e-4;
    std::string goal_source = "random";
    double entropy_coeff = 0.0;
    double min_std = 1e-6;
    double cpc_reg_coeff = 1e-2;
    double td_weight_clip = 20.0;
    double density_variance_floor = 1e-4;
    bool filter_enabled = false;
    double filter_epsilon = std::numeric_limits<double>::infinity();
};

struct ScheduleConfig {
    std::int64_t initial_random_steps = 10'000;
    std::int64_t train_collect_interval = 16;
    double samples_per_insert = 256.0;
    std::int64_t total_env_steps = 1'000'000;
    std::int64_t eval_interval = 10'000;
    int eval_episodes = 100;
    /// 0 writes only the final checkpoint.
    std::int64_t checkpoint_interval = 0;
    std::int64_t buffer_capacity = 1'000'000;
    int max_rejections = 20;
    /// Threads used for evaluation rollouts; results do not depend on it.
    int eval_workers = 1;
    /// Training losses are logged every log_interval learner steps.
    std::int64_t log_interval = 1000;
};

struct OfflineConfig {
    double lambda = 0.05;
    int num_critics = 2;
    std::string dataset;
    std::int64_t gradient_steps = 10'000;
    std::string goal_source = "future";
};

/// Plain-text "key = value" file; '#' starts a comment. Every key has a
/// default; unknown keys are errors.
struct ExperimentConfig {
    EnvConfig env;
    AgentConfig agent;
    ScheduleConfig schedule;
    OfflineConfig offline;
    std::uint64_t seed = 0;

    /// Applies one key. Throws ConfigError on unknown keys or bad values.
    void set(const std::string& key, const std::string& value);
    /// Every problem found, empty when the config is valid.
    std::vector<std::string> problems() const;
    /// Throws ConfigError listing every problem.
    void validate() const;

    /// Canonical text with every key, in a fixed order.
    std::string to_text() const;
    /// FNV-1a of to_text().
    std::uint64_t hash() const;

    static ExperimentConfig parse(const std::string& text);
    static ExperimentConfig load(const std::string& path);
    static std::vector<std::string> keys();
};

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace crl
