#pragma once

#include <vector>

#include "crl/envs/env_spec.hpp"

namespace crl {

/// Finite MDP with transition[a](s, s') = p(s' | s, a).
struct TabularMDP {
    int num_states = 0;
    int num_actions = 0;
    std::vector<Matrix> transition;
    Vector initial_distribution;
    Vector goal_distribution;
    double gamma = 0.99;

    /// Throws ConfigError unless every row, p0 and p_g are distributions
    /// (non-negative, sum to one within 1e-12) and gamma is in (0, 1).
    void validate() const;

    /// One-step distribution over next states from (s, a).
    Eigen::RowVectorXd next_state_row(int s, int a) const { return transition[a].row(s); }
};

/// Rows drawn from a flat Dirichlet; p0 and p_g uniform unless stated.
TabularMDP random_tabular_mdp(Rng& rng, int num_states, int num_actions, double gamma);

/// Deterministic chain: action 0 advances s -> min(s+1, S-1), action 1 stays.
TabularMDP chain_mdp(int num_states, double gamma);

/// Runs a TabularMDP as a GoalEnv. Observations are the state index as a
/// one-element vector; success is exact state match.
class TabularEnv final : public GoalEnv {
public:
    TabularEnv(TabularMDP mdp, int horizon);

    const EnvSpec& spec() const override { return spec_; }
    Vector reset(const Vector& goal, Rng& rng) override;
    StepResult step(const Vector& action, Rng& rng) override;
    Vector sample_goal(Rng& rng) const override;
    std::unique_ptr<GoalEnv> clone() const override { return std::make_unique<TabularEnv>(*this); }

    const Vector& observation() const override { return obs_; }
    const Vector& commanded_goal() const override { return goal_; }
    int steps_taken() const override { return steps_; }

    const TabularMDP& mdp() const { return mdp_; }
    int state() const { return state_; }

private:
    TabularMDP mdp_;
    EnvSpec spec_;
    int state_ = 0;
    int steps_ = 0;
    Vector obs_;
    Vector goal_;
};

}  // namespace crl

namespace crl {

/// Goal-conditioned tabular policy: probs[g](s, a) = pi(a | s, g).
struct TabularPolicy {
    std::vector<Matrix> probs;

    int num_goals() const { return static_cast<int>(probs.size()); }
    int num_states() const { return probs.empty() ? 0 : static_cast<int>(probs.front().rows()); }
    int num_actions() const { return probs.empty() ? 0 : static_cast<int>(probs.front().cols()); }

    static TabularPolicy uniform(int num_states, int num_actions);
    /// The same state-conditioned policy for every goal.
    static TabularPolicy goal_independent(const Matrix& state_policy, int num_goals);
    /// Independent Dirichlet(1) rows per (goal, state).
    static TabularPolicy random(Rng& rng, int num_states, int num_actions);
    /// Deterministic argmax of scores[g](s, a); ties go to the lowest index.
    static TabularPolicy greedy(const std::vector<Matrix>& scores);

    /// Goal-averaged policy sum_g w(g) pi(a|s,g), replicated for every goal.
    TabularPolicy averaged(const Vector& goal_weights) const;

    /// State-to-state transition matrix under pi(.|., g).
    Matrix state_transition(const TabularMDP& mdp, int goal) const;
    void validate(const TabularMDP& mdp) const;
};

}  // namespace crl
