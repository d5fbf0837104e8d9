#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "crl/numcore/rng.hpp"
#include "crl/replay/buffer.hpp"

namespace crl {

/// Draws time offsets with P(delta = k) = (1 - gamma) gamma^(k - 1), k >= 1.
class GeometricSampler {
public:
    explicit GeometricSampler(double gamma, int max_rejections = 20);

    double gamma() const { return gamma_; }
    int max_rejections() const { return max_rejections_; }

    /// Untruncated draw; consumes exactly one uniform.
    std::int64_t draw(Rng& rng) const;
    /// Draw restricted to [1, remaining]: redraw up to max_rejections times,
    /// then return `remaining` (the last state of the trajectory).
    std::int64_t draw_truncated(std::int64_t remaining, Rng& rng) const;

private:
    double gamma_;
    int max_rejections_;
};

/// (s_t, a_t, s_{t+delta}) triplets. `futures` holds the goal coordinates of
/// the future states; negatives come from the other rows.
struct NceBatch {
    Matrix states;
    Matrix actions;
    Matrix futures;
    std::vector<std::uint64_t> traj_ids;
    std::vector<Eigen::Index> t;
    std::vector<Eigen::Index> offsets;

    Eigen::Index size() const { return states.rows(); }
    NceBatch select(const std::vector<Eigen::Index>& rows) const;
};

/// Positives drawn from the next-state / future-state mixture: row i takes
/// s_{t+1} with probability (1 - gamma) / (2 - gamma), else a geometric future.
struct MixtureBatch {
    NceBatch batch;
    Matrix next_states;  // s_{t+1} for each row's anchor
    std::vector<bool> next_state_branch;
};

/// Consecutive transitions plus random goals.
struct TdBatch {
    Matrix states;
    Matrix actions;
    Matrix next_states;
    Matrix goals;
    std::vector<std::uint64_t> traj_ids;
    std::vector<Eigen::Index> t;
};

struct ActorGoalSource {
    enum class Kind { random, future, mix };
    Kind kind = Kind::random;
    double future_prob = 0.0;  // used by mix

    /// Parses "random", "future" or "mix(p)" with p in [0, 1].
    static ActorGoalSource parse(const std::string& text);
    std::string to_string() const;
};

NceBatch sample_nce_batch(const TrajectoryBuffer& buffer, const GeometricSampler& sampler, Eigen::Index batch_size,
                          Rng& rng);

MixtureBatch sample_mixture_batch(const TrajectoryBuffer& buffer, const GeometricSampler& sampler,
                                  Eigen::Index batch_size, Rng& rng);

TdBatch sample_td_batch(const TrajectoryBuffer& buffer, Eigen::Index batch_size, Rng& rng);

/// Goal coordinates of states drawn uniformly from everything stored.
Matrix sample_random_goals(const TrajectoryBuffer& buffer, Eigen::Index count, Rng& rng);

/// Goals for the actor loss, one per row of `batch`. The future source draws
/// fresh geometric futures from each row's own trajectory position. With
/// mix(p) each row picks the future source with probability p; p = 0 and
/// p = 1 take the pure paths and consume no extra randomness.
Matrix sample_actor_goals(const TrajectoryBuffer& buffer, const GeometricSampler& sampler,
                          const ActorGoalSource& source, const NceBatch& batch, Rng& rng,
                          std::vector<bool>* used_future = nullptr);

}  // namespace crl
