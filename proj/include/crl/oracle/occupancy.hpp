#pragma once

#include <limits>
#include <vector>

#include "crl/critic/table_critic.hpp"
#include "crl/envs/tabular_mdp.hpp"

namespace crl {

/// Discounted occupancy from the next step onward:
///   M_c(s, a, .) = (1 - gamma) P(. | s, a) (I - gamma P_pi_c)^-1
/// for the policy conditioned on goal c. `by_goal[c]` is (S*A) x S.
struct OccupancyTable {
    double gamma = 0.0;
    int num_states = 0;
    int num_actions = 0;
    std::vector<Matrix> by_goal;

    /// M(s, a, g) under the policy commanded to reach g.
    double operator()(int s, int a, int g) const { return by_goal[g](s * num_actions + a, g); }
    /// (S*A) x S table whose column g is taken from by_goal[g].
    Matrix matched() const;
};

/// Q_g(s, a) for the reward r_g(s, a) = (1 - gamma) P(s' = g | s, a), obtained
/// by a Bellman solve for V and one backup. values is (S*A) x S, column g.
struct ExactQ {
    double gamma = 0.0;
    int num_states = 0;
    int num_actions = 0;
    Matrix values;

    double operator()(int s, int a, int g) const { return values(s * num_actions + a, g); }
};

/// Throws NumericError if the linear system is numerically singular.
OccupancyTable exact_occupancy(const TabularMDP& mdp, const TabularPolicy& policy, double gamma);
ExactQ exact_q(const TabularMDP& mdp, const TabularPolicy& policy, double gamma);

/// V_g(s) = sum_a pi(a|s,g) Q_g(s,a); S x S matrix with column g.
Matrix exact_v(const TabularMDP& mdp, const TabularPolicy& policy, double gamma);

/// Empirical frequency of s_{t+delta} with delta geometric (delta >= 1) under
/// the policy conditioned on `conditioning_goal`; `rollouts_per_pair` samples
/// per (s, a). Offsets are capped where the remaining geometric mass is below
/// 1e-7. Returns (S*A) x S.
Matrix monte_carlo_occupancy(const TabularMDP& mdp, const TabularPolicy& policy, int conditioning_goal,
                             double gamma, int rollouts_per_pair, Rng& rng);

inline constexpr double kCriticSentinel = -std::numeric_limits<double>::infinity();

/// f*(s, a, g) = log(M(s, a, g) / p_marg(g)); entries with M = 0 hold
/// kCriticSentinel. Throws ConfigError if any p_marg(g) <= 0.
TableCritic bayes_optimal_critic(const Matrix& occupancy, int num_actions, const Vector& negative_marginal);

}  // namespace crl
