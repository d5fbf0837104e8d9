#pragma once

#include "crl/envs/tabular_mdp.hpp"
#include "crl/numcore/types.hpp"

namespace crl {

/// One free parameter per (s, a, g): values(s * A + a, g) = f(s, a, g).
/// Separates estimation error from approximation error in tabular studies.
struct TableCritic {
    int num_states = 0;
    int num_actions = 0;
    Matrix values;

    TableCritic() = default;
    TableCritic(int s, int a) : num_states(s), num_actions(a), values(Matrix::Zero(s * a, s)) {}

    double operator()(int s, int a, int g) const { return values(s * num_actions + a, g); }
    static int row(int s, int a, int num_actions) { return s * num_actions + a; }
};

struct TableLoss {
    double loss = 0.0;
    Matrix grad;  // same shape as TableCritic::values
};

/// Expected binary NCE with one positive and one negative per (s, a):
///   -sum_sa p(s,a) sum_g [M(s,a,g) log s(f) + p_neg(g) log(1 - s(f))].
/// `occupancy` is (S*A) x S, `sa_weights` has S*A entries. The minimizer is
/// f = log(M / p_neg).
TableLoss nce_expected_loss(const TableCritic& critic, const Matrix& occupancy, const Vector& sa_weights,
                            const Vector& negative_marginal);

/// Expected C-learning loss under the exact dynamics and goal-conditioned
/// policy, with goals and negatives drawn from `goal_weights`. The bootstrap
/// weight E[exp f(s', a', g)] is treated as a constant.
TableLoss c_learning_expected_loss(const TableCritic& critic, const TabularMDP& mdp, const TabularPolicy& policy,
                                   const Vector& sa_weights, const Vector& goal_weights);

/// Expected NCE + C-learning loss: positives from the mixture
/// ((1-gamma) P + M) / (2-gamma) scaled by (2-gamma), bootstrap term as in
/// C-learning, and doubled negatives drawn from `goal_weights`.
TableLoss nce_plus_c_expected_loss(const TableCritic& critic, const TabularMDP& mdp, const TabularPolicy& policy,
                                   const Matrix& occupancy, const Vector& sa_weights, const Vector& goal_weights);

}  // namespace crl
