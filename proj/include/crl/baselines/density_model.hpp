#pragma once

#include "crl/actor/actor_losses.hpp"
#include "crl/actor/goal_policy.hpp"
#include "crl/envs/env_spec.hpp"
#include "crl/numcore/mlp.hpp"

namespace crl {

/// q(s_f | s, a): a model of the discounted state occupancy measure.
///
/// Gaussian head: the network emits (mean, raw) per goal coordinate with
/// variance = variance_floor + softplus(raw). Categorical head: the network
/// emits logits over `num_outcomes` states and targets are state indices.
class DensityModel {
public:
    enum class Head { gaussian, categorical };

    DensityModel() = default;
    DensityModel(int obs_dim, ActionSpace action, Head head, int outcome_dim, const std::vector<int>& hidden,
                 Rng& rng, double variance_floor = 1e-4);

    Head head() const { return head_; }
    int outcome_dim() const { return outcome_dim_; }
    double variance_floor() const { return variance_floor_; }
    const ActionSpace& action_space() const { return action_; }

    Mlp& net() { return net_; }
    const Mlp& net() const { return net_; }
    ParamList& params() { return net_.params(); }
    const ParamList& params() const { return net_.params(); }
    std::vector<std::string> param_names() const { return net_.param_names("density"); }

    Matrix input(const Matrix& states, const Matrix& actions) const;
    /// log q(target | s, a) per row.
    Vector log_prob(const Matrix& states, const Matrix& actions, const Matrix& targets) const;
    /// Categorical head only: B x num_outcomes probabilities.
    Matrix probabilities(const Matrix& states, const Matrix& actions) const;
    /// Gaussian head only: (mean, variance) for each row.
    std::pair<Matrix, Matrix> gaussian_params(const Matrix& states, const Matrix& actions) const;

    /// log q(g | s, a) as a function of the encoded action, for the
    /// reparametrized model-based actor loss.
    ActionScorer scorer(const Matrix& states, const Matrix& goals) const;

    /// Per-row log density and its gradient wrt the raw network output.
    std::pair<Vector, Matrix> log_prob_and_output_grad(const Matrix& out, const Matrix& targets) const;

private:

    ActionSpace action_;
    Head head_ = Head::gaussian;
    int obs_dim_ = 0;
    int outcome_dim_ = 0;
    double variance_floor_ = 1e-4;
    Mlp net_;
};

struct DensityLoss {
    double loss = 0.0;
    ParamList grads;
};

/// Negative log-likelihood -mean log q(s_f+ | s, a).
DensityLoss density_loss(const DensityModel& model, const Matrix& states, const Matrix& actions,
                         const Matrix& future_targets);

/// Categorical head: cross-entropy against soft targets,
/// -sum_i w_i sum_k target_probs(i, k) log q(k | s_i, a_i) with w summing to 1.
DensityLoss density_loss_soft(const DensityModel& model, const Matrix& states, const Matrix& actions,
                              const Matrix& target_probs, const Vector& row_weights);

/// -mean log q(g | s, a ~ pi(.|s,g)), reparametrized through a.
ActorLoss mb_actor_loss(const GoalPolicy& policy, const DensityModel& model, const Matrix& states,
                        const Matrix& goals, double entropy_coeff, const Matrix& noise);
ActorLoss mb_actor_loss(const GoalPolicy& policy, const DensityModel& model, const Matrix& states,
                        const Matrix& goals, double entropy_coeff, Rng& rng);

}  // namespace crl
