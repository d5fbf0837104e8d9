#pragma once

#include <limits>

#include "crl/critic/contrastive_critic.hpp"

namespace crl {

/// Binary NCE over the in-batch outer product: row i's positive is goal i, its
/// negatives are the other rows' goals. Mean sigmoid cross-entropy against the
/// identity label matrix. Requires B >= 2.
CriticLoss nce_loss(const ContrastiveCritic& critic, const Matrix& states, const Matrix& actions,
                    const Matrix& future_goals);

/// InfoNCE: per-row softmax cross-entropy with the positive on the diagonal,
/// plus reg_coeff * mean_i (logsumexp_j logits_ij)^2. Requires B >= 2.
CriticLoss cpc_loss(const ContrastiveCritic& critic, const Matrix& states, const Matrix& actions,
                    const Matrix& future_goals, double reg_coeff = 1e-2);

/// Inputs for the temporal-difference critic terms. next_actions are drawn
/// from the current policy at (next_state, goal).
struct TdInputs {
    Matrix states;
    Matrix actions;
    Matrix next_states;
    Matrix next_actions;
    Matrix goals;  // random goals
};

/// C-learning:
///   -mean[(1-gamma) log s(f(s,a,g(s'))) + gamma w log s(f(s,a,g)) + log(1 - s(f(s,a,g)))]
/// with w = stop_grad(min(exp f(s', a', g), td_weight_clip)).
CriticLoss c_learning_loss(const ContrastiveCritic& critic, const TdInputs& batch, double gamma,
                           double td_weight_clip = std::numeric_limits<double>::infinity());

/// Convenience overload that samples next actions from `policy`.
CriticLoss c_learning_loss(const ContrastiveCritic& critic, const GoalPolicy& policy, TdInputs batch, double gamma,
                           double td_weight_clip, Rng& rng);

/// Separately reported pieces of the NCE + C-learning objective (each a
/// batch mean of the log-likelihood term, before negation).
struct NcePlusCTerms {
    double positive = 0.0;  // mean log s(f(s, a, s_f+)) over mixture positives
    double td = 0.0;        // mean w log s(f(s, a, g))
    double negative = 0.0;  // mean log(1 - s(f(s, a, g)))
};

/// NCE + C-learning, row-wise (no outer product):
///   -[(2-gamma) positive + gamma td + 2 negative]
/// `mixture_goals` are positives drawn from the next-state / future-state
/// mixture for the same (state, action) rows as `batch`.
CriticLoss nce_plus_c_loss(const ContrastiveCritic& critic, const TdInputs& batch, const Matrix& mixture_goals,
                           double gamma, double td_weight_clip = std::numeric_limits<double>::infinity(),
                           NcePlusCTerms* terms = nullptr);

}  // namespace crl
