#pragma once

#include <string>
#include <vector>

#include "crl/envs/tabular_mdp.hpp"

namespace crl {

enum class AuditCritic {
    /// One exact critic per commanded goal.
    per_goal,
    /// A single critic for the goal-averaged policy sum_c p_g(c) pi(.|., c).
    averaged,
};

struct AuditReport {
    AuditCritic critic = AuditCritic::per_goal;
    double gamma = 0.0;
    /// sup over goals and states of |V_avg,g(s) - V_g(s)| (0 for per-goal critics).
    double epsilon_hat = 0.0;
    /// sup |Q_avg,g(s,a) - Q_g(s,a)|; never exceeds gamma * epsilon_hat.
    double q_gap = 0.0;
    /// -2 gamma epsilon_hat / (1 - gamma).
    double bound = 0.0;
    /// Indexed by goal; only goals with p_g(g) > 0 are evaluated.
    std::vector<int> goals;
    std::vector<double> old_return;
    std::vector<double> new_return;
    /// J(pi') - J(pi) via the performance-difference identity.
    std::vector<double> improvement;
    double min_improvement = 0.0;
    bool passed = false;
};

/// Builds the greedy policy pi'(s, g) = argmax_a f*(s, a, g) from the
/// Bayes-optimal critic of `old_policy` (or of its goal average) and compares
/// per-goal returns J_g = p0 . V_g against the old policy.
AuditReport policy_improvement_audit(const TabularMDP& mdp, const TabularPolicy& old_policy, double gamma,
                                     AuditCritic critic);

/// epsilon = 0 selects per-goal critics, any positive epsilon the averaged one.
AuditReport policy_improvement_audit(const TabularMDP& mdp, const TabularPolicy& old_policy, double gamma,
                                     double epsilon);

std::string to_string(AuditCritic critic);

}  // namespace crl
