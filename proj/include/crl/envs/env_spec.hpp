#pragma once

#include <memory>

#include "crl/numcore/rng.hpp"
#include "crl/numcore/types.hpp"

namespace crl {

enum class ActionKind { discrete, continuous };

/// Discrete: `size` actions, encoded one-hot for network inputs and stored as a
/// single index column. Continuous: a `size`-dimensional box [-bound, bound].
struct ActionSpace {
    ActionKind kind = ActionKind::continuous;
    int size = 1;
    double bound = 1.0;

    /// Width of a stored action row.
    int stored_dim() const { return kind == ActionKind::discrete ? 1 : size; }
    /// Width of the action features fed to networks.
    int encoded_dim() const { return size; }
};

/// Maps stored actions (B x stored_dim) to network features (B x encoded_dim).
Matrix encode_actions(const ActionSpace& space, const Matrix& actions);

struct EnvSpec {
    int observation_dim = 1;
    /// Goals are the first `goal_dim` coordinates of an observation.
    int goal_dim = 1;
    ActionSpace action;
    /// Closed threshold: success iff distance <= success_radius.
    double success_radius = 0.0;
    int max_episode_steps = 1;
};

Vector goal_slice(const Vector& observation, const EnvSpec& spec);
Matrix goal_slice(const Matrix& observations, const EnvSpec& spec);

bool success(const Vector& observation, const Vector& goal, const EnvSpec& spec);
double goal_distance(const Vector& observation, const Vector& goal, const EnvSpec& spec);

struct StepResult {
    Vector observation;
    bool done = false;
};

/// Reward-free goal-conditioned environment. Episodes always run to
/// `max_episode_steps`; reaching the goal does not terminate them.
class GoalEnv {
public:
    virtual ~GoalEnv() = default;

    virtual const EnvSpec& spec() const = 0;
    virtual Vector reset(const Vector& goal, Rng& rng) = 0;
    /// Throws std::logic_error when called after the episode is done.
    virtual StepResult step(const Vector& action, Rng& rng) = 0;
    /// Draws a goal from the environment's goal distribution.
    virtual Vector sample_goal(Rng& rng) const = 0;
    virtual std::unique_ptr<GoalEnv> clone() const = 0;

    virtual const Vector& observation() const = 0;
    virtual const Vector& commanded_goal() const = 0;
    virtual int steps_taken() const = 0;
    bool done() const { return steps_taken() >= spec().max_episode_steps; }
};

}  // namespace crl
