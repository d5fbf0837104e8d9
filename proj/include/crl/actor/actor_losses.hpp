#pragma once

#include <span>

#include "crl/actor/goal_policy.hpp"
#include "crl/critic/contrastive_critic.hpp"

namespace crl {

struct ActorLoss {
    double loss = 0.0;
    ParamList grads;  // policy parameters only
};

/// -mean f(s, a ~ pi(.|s,g), g) + entropy_coeff * mean log pi(a|s,g). The
/// critic is read-only: gradients reach the policy through the sampled action.
ActorLoss actor_loss(const GoalPolicy& policy, const ContrastiveCritic& critic, const Matrix& states,
                     const Matrix& goals, double entropy_coeff, Rng& rng);
ActorLoss actor_loss(const GoalPolicy& policy, const ContrastiveCritic& critic, const Matrix& states,
                     const Matrix& goals, double entropy_coeff, const Matrix& noise);

/// -mean[(1 - lambda) min_k f_k(s, a ~ pi, g) + lambda log pi(a_data | s, g)].
/// With lambda = 1 this is bit-for-bit the GCBC loss on the same batch.
ActorLoss offline_actor_loss(const GoalPolicy& policy, std::span<const ContrastiveCritic> critics,
                             const Matrix& states, const Matrix& dataset_actions, const Matrix& goals, double lambda,
                             const Matrix& noise);
ActorLoss offline_actor_loss(const GoalPolicy& policy, std::span<const ContrastiveCritic> critics,
                             const Matrix& states, const Matrix& dataset_actions, const Matrix& goals, double lambda,
                             Rng& rng);

/// Row-wise minimum over critics, with the gradient of the minimizing critic.
ActionScorer min_critic_scorer(std::span<const ContrastiveCritic> critics, const Matrix& states, const Matrix& goals);

}  // namespace crl
