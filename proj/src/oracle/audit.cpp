#include "crl/oracle/audit.hpp"

#include <algorithm>
#include <cmath>

#include "crl/oracle/occupancy.hpp"

namespace crl {

namespace {

// Greedy in f*, with exact ties in f* resolved by the larger occupancy and
// then the lowest index, so the chosen action also maximizes M.
std::vector<int> greedy_actions(const TableCritic& f, const Matrix& occupancy, int goal) {
    std::vector<int> best(static_cast<std::size_t>(f.num_states));
    for (int s = 0; s < f.num_states; ++s) {
        int a_best = 0;
        for (int a = 1; a < f.num_actions; ++a) {
            const double fa = f(s, a, goal);
            const double fb = f(s, a_best, goal);
            const double ma = occupancy(s * f.num_actions + a, goal);
            const double mb = occupancy(s * f.num_actions + a_best, goal);
            if (fa > fb || (fa == fb && ma > mb)) a_best = a;
        }
        best[static_cast<std::size_t>(s)] = a_best;
    }
    return best;
}

}  // namespace

std::string to_string(AuditCritic critic) { return critic == AuditCritic::per_goal ? "per_goal" : "averaged"; }

AuditReport policy_improvement_audit(const TabularMDP& mdp, const TabularPolicy& old_policy, double gamma,
                                     double epsilon) {
    if (!(epsilon >= 0.0)) throw ConfigError("policy_improvement_audit: epsilon must be non-negative");
    return policy_improvement_audit(mdp, old_policy, gamma, epsilon == 0.0 ? AuditCritic::per_goal : AuditCritic::averaged);
}

AuditReport policy_improvement_audit(const TabularMDP& mdp, const TabularPolicy& old_policy, double gamma,
                                     AuditCritic critic) {
    const int n_s = mdp.num_states;
    const int n_a = mdp.num_actions;
    const Vector& p_g = mdp.goal_distribution;
    if (p_g.size() != n_s) throw ShapeError("policy_improvement_audit: goal distribution size");

    AuditReport rep;
    rep.critic = critic;
    rep.gamma = gamma;

    // Q of the old policy (equal to its matched occupancy).
    const Matrix q_old = exact_occupancy(mdp, old_policy, gamma).matched();
    const Matrix v_old = exact_v(mdp, old_policy, gamma);

    Matrix critic_occupancy = q_old;
    if (critic == AuditCritic::averaged) {
        const TabularPolicy avg = old_policy.averaged(p_g);
        critic_occupancy = exact_occupancy(mdp, avg, gamma).matched();
        const Matrix v_avg = exact_v(mdp, avg, gamma);
        const Matrix q_avg = exact_q(mdp, avg, gamma).values;
        const Matrix q_cond = exact_q(mdp, old_policy, gamma).values;
        for (int g = 0; g < n_s; ++g) {
            if (!(p_g(g) > 0.0)) continue;
            rep.epsilon_hat = std::max(rep.epsilon_hat, (v_avg.col(g) - v_old.col(g)).cwiseAbs().maxCoeff());
            rep.q_gap = std::max(rep.q_gap, (q_avg.col(g) - q_cond.col(g)).cwiseAbs().maxCoeff());
        }
    }
    rep.bound = -2.0 * gamma * rep.epsilon_hat / (1.0 - gamma);

    const TableCritic f = bayes_optimal_critic(critic_occupancy, n_a, Vector::Constant(n_s, 1.0 / n_s));

    TabularPolicy greedy;
    greedy.probs.assign(static_cast<std::size_t>(n_s), Matrix::Zero(n_s, n_a));
    std::vector<std::vector<int>> chosen(static_cast<std::size_t>(n_s));
    for (int g = 0; g < n_s; ++g) {
        chosen[g] = greedy_actions(f, critic_occupancy, g);
        for (int s = 0; s < n_s; ++s) greedy.probs[g](s, chosen[g][s]) = 1.0;
    }
    const Matrix v_new = exact_v(mdp, greedy, gamma);

    // J(pi') - J(pi) = p0 . (I - gamma P_pi')^-1 A with
    // A(s) = sum_a pi(a|s) (Q(s, pi'(s)) - Q(s, a)); the series is summed
    // term by term so a non-negative A gives a non-negative result.
    const int max_iters =
        gamma == 0.0 ? 1 : static_cast<int>(std::ceil(std::log(1e-18) / std::log(gamma))) + 10;
    rep.min_improvement = std::numeric_limits<double>::infinity();
    for (int g = 0; g < n_s; ++g) {
        if (!(p_g(g) > 0.0)) continue;
        Vector adv = Vector::Zero(n_s);
        for (int s = 0; s < n_s; ++s) {
            const double q_new = q_old(s * n_a + chosen[g][s], g);
            for (int a = 0; a < n_a; ++a) adv(s) += old_policy.probs[g](s, a) * (q_new - q_old(s * n_a + a, g));
        }
        const Matrix p_new = greedy.state_transition(mdp, g);
        Vector d = adv;
        for (int it = 0; it < max_iters; ++it) {
            Vector next = adv + gamma * (p_new * d);
            const bool converged = next == d;
            d = std::move(next);
            if (converged) break;
        }
        const double imp = mdp.initial_distribution.dot(d);
        rep.goals.push_back(g);
        rep.old_return.push_back(mdp.initial_distribution.dot(v_old.col(g)));
        rep.new_return.push_back(mdp.initial_distribution.dot(v_new.col(g)));
        rep.improvement.push_back(imp);
        rep.min_improvement = std::min(rep.min_improvement, imp);
    }
    rep.passed = rep.min_improvement >= rep.bound;
    return rep;
}

}  // namespace crl
