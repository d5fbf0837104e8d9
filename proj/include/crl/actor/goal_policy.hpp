#pragma once

#include <functional>
#include <string>
#include <vector>

#include "crl/envs/env_spec.hpp"
#include "crl/numcore/mlp.hpp"

namespace crl {

/// Value of an action and its gradient with respect to the encoded action
/// features, one row per batch element.
struct ActionScore {
    Vector value;
    Matrix d_action;
};

/// Scores a batch of encoded actions (B x encoded_dim). Used to plug a critic or
/// density model into the reparametrized policy objective.
using ActionScorer = std::function<ActionScore(const Matrix& encoded_actions)>;

/// pi(a | s, g). The network maps [state, goal] to either the mean and raw scale
/// of a tanh-squashed diagonal Gaussian (continuous) or to action logits
/// (discrete). Gaussian scale is softplus(raw) + min_std.
class GoalPolicy {
public:
    struct Sample {
        Matrix actions;  // stored form: B x stored_dim
        Vector log_probs;
    };

    struct Objective {
        double loss = 0.0;
        double mean_score = 0.0;
        double mean_log_prob = 0.0;
        ParamList grads;
    };

    struct LogProbGrad {
        Vector log_probs;
        ParamList grads;
    };

    GoalPolicy() = default;
    GoalPolicy(int obs_dim, int goal_dim, ActionSpace action, const std::vector<int>& hidden, Rng& rng,
               double min_std = 1e-6);

    const ActionSpace& action_space() const { return action_; }
    int obs_dim() const { return obs_dim_; }
    int goal_dim() const { return goal_dim_; }
    double min_std() const { return min_std_; }

    Mlp& net() { return net_; }
    const Mlp& net() const { return net_; }
    ParamList& params() { return net_.params(); }
    const ParamList& params() const { return net_.params(); }
    std::vector<std::string> param_names() const { return net_.param_names("policy"); }

    /// Continuous: reparametrized draw a = bound * tanh(mean + std * z).
    /// Discrete: categorical draw from softmax(logits).
    Sample sample(const Matrix& states, const Matrix& goals, Rng& rng) const;
    /// Continuous only: the same draw with caller-supplied standard-normal noise.
    Sample sample_with_noise(const Matrix& states, const Matrix& goals, const Matrix& noise) const;

    Vector log_prob(const Matrix& states, const Matrix& goals, const Matrix& actions) const;
    /// log-probabilities and the gradient of sum_i weights_i * log pi(a_i | s_i, g_i).
    LogProbGrad log_prob_grad(const Matrix& states, const Matrix& goals, const Matrix& actions,
                              const Vector& weights) const;

    /// Continuous: bound * tanh(mean). Discrete: argmax with lowest-index ties.
    Matrix act_deterministic(const Matrix& states, const Matrix& goals) const;
    /// Discrete only: B x A action probabilities.
    Matrix probabilities(const Matrix& states, const Matrix& goals) const;

    /// loss = -mean score(a) + entropy_coeff * mean log pi(a), a ~ pi.
    /// Continuous policies differentiate through the reparametrized sample
    /// driven by `noise` (B x dim); discrete policies take the exact
    /// expectation over actions and ignore `noise`.
    Objective reparam_objective(const Matrix& states, const Matrix& goals, const ActionScorer& scorer,
                                double entropy_coeff, const Matrix& noise) const;
    Objective reparam_objective(const Matrix& states, const Matrix& goals, const ActionScorer& scorer,
                                double entropy_coeff, Rng& rng) const;

    /// Standard-normal noise of the right shape for `reparam_objective`.
    Matrix draw_noise(Eigen::Index rows, Rng& rng) const;

private:
    Matrix policy_input(const Matrix& states, const Matrix& goals) const;

    ActionSpace action_;
    int obs_dim_ = 0;
    int goal_dim_ = 0;
    double min_std_ = 1e-6;
    Mlp net_;
};

/// Numerically stable log(1 - tanh(u)^2).
double log1m_tanh_sq(double u);

}  // namespace crl
