#pragma once

#include <functional>

#include "crl/envs/env_spec.hpp"
#include "crl/numcore/rng.hpp"

namespace crl {

struct EvalResult {
    int episodes = 0;
    int successes = 0;
    double success_rate = 0.0;
    /// Binomial standard error sqrt(p (1 - p) / n).
    double standard_error = 0.0;
    /// Mean goal distance at the last step of each episode.
    double mean_final_distance = 0.0;
};

/// (observation, goal, rng) -> stored-form action.
using ActionFn = std::function<Vector(const Vector&, const Vector&, Rng&)>;

/// Rolls out `episodes` full-horizon episodes with goals from the
/// environment's goal distribution. An episode succeeds if the success
/// predicate holds at any step, the reset state included. Episode i uses
/// the stream base.split(i), so results do not depend on `workers`.
EvalResult evaluate(const GoalEnv& prototype, const ActionFn& act, int episodes, const Rng& base, int workers = 1);

/// Uniformly random actions (the random-walk baseline).
ActionFn random_action_fn(const ActionSpace& space);

}  // namespace crl
