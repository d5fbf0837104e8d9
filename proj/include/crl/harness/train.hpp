#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "crl/envs/point_maze.hpp"
#include "crl/harness/agent.hpp"
#include "crl/harness/config.hpp"
#include "crl/harness/evaluate.hpp"
#include "crl/harness/metrics.hpp"
#include "crl/replay/buffer.hpp"
#include "crl/replay/filter.hpp"
#include "crl/replay/samplers.hpp"

namespace crl {

/// Builds the point maze named by the config ("empty5", "spiral11",
/// "nine_room" or "file:<path>").
PointMaze make_maze_env(const EnvConfig& config);

/// Random streams of a run, each derived from the seed by `split`.
struct TrainStreams {
    Rng data;     // batch sampling
    Rng actor;    // policy noise inside updates
    Rng collect;  // environment and behavior policy during collection
    Rng eval;     // base stream for evaluation episodes

    explicit TrainStreams(std::uint64_t seed);
};

struct UpdateStats {
    double critic_loss = 0.0;
    double actor_loss = 0.0;
    double density_loss = 0.0;
    Eigen::Index critic_rows = 0;
};

/// One learner step of the online variants.
UpdateStats online_update(Agent& agent, const ExperimentConfig& config, const TrajectoryBuffer& buffer,
                          TrainStreams& streams, FilterStats& filter_stats);

/// One learner step of offline training: critics on NCE, policy on the
/// offline actor loss (or plain GCBC when the variant is gcbc).
UpdateStats offline_update(Agent& agent, const ExperimentConfig& config, const TrajectoryBuffer& buffer,
                           TrainStreams& streams);

struct RunOptions {
    /// Checkpoint to resume from (written by an earlier run into the same
    /// output directory).
    std::string resume_from;
    /// Stop (with a checkpoint) once this many env steps (online) or learner
    /// steps (offline) are done; negative runs to completion.
    std::int64_t stop_at = -1;
    /// Called after each metrics record is written.
    std::function<void(const MetricsRecord&)> on_metric;
};

struct RunResult {
    std::int64_t env_steps = 0;
    std::int64_t learner_steps = 0;
    bool completed = false;
    EvalResult final_eval;
    FilterStats filter;
    std::string checkpoint_path;
};

/// Writes config.txt, metrics.jsonl and checkpoint.bin into `out_dir`.
RunResult train_online(const ExperimentConfig& config, const std::string& out_dir, const RunOptions& options = {});

/// Fixed-dataset training from config.offline.dataset; the environment is
/// only used for evaluation. Throws ConfigError if the dataset does not match
/// the environment.
RunResult train_offline(const ExperimentConfig& config, const std::string& out_dir, const RunOptions& options = {});

/// Config and agent stored in a checkpoint.
struct LoadedRun {
    ExperimentConfig config;
    Agent agent;
    std::int64_t env_steps = 0;
    std::int64_t learner_steps = 0;
};
LoadedRun load_run(const std::string& checkpoint_path);

/// Deterministic-policy evaluation of an agent.
EvalResult evaluate_agent(const Agent& agent, const GoalEnv& env, int episodes, const Rng& base, int workers = 1);

}  // namespace crl
