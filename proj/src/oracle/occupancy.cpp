#include "crl/oracle/occupancy.hpp"

#include <cmath>

#include <Eigen/LU>

namespace crl {

namespace {

void check_inputs(const TabularMDP& mdp, const TabularPolicy& policy, double gamma) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("oracle: gamma must be in [0, 1)");
    policy.validate(mdp);
}

// Stacked one-step transitions: row s*A + a holds P(. | s, a).
Matrix stacked_transitions(const TabularMDP& mdp) {
    Matrix p(mdp.num_states * mdp.num_actions, mdp.num_states);
    for (int s = 0; s < mdp.num_states; ++s)
        for (int a = 0; a < mdp.num_actions; ++a) p.row(s * mdp.num_actions + a) = mdp.transition[a].row(s);
    return p;
}

Eigen::PartialPivLU<Matrix> factor_resolvent(const TabularMDP& mdp, const TabularPolicy& policy, int goal,
                                             double gamma) {
    const Matrix system =
        Matrix::Identity(mdp.num_states, mdp.num_states) - gamma * policy.state_transition(mdp, goal);
    Eigen::PartialPivLU<Matrix> lu(system);
    if (!(lu.rcond() > 1e-14)) throw NumericError("oracle: singular occupancy system");
    return lu;
}

}  // namespace

Matrix OccupancyTable::matched() const {
    Matrix m(num_states * num_actions, num_states);
    for (int g = 0; g < num_states; ++g) m.col(g) = by_goal[g].col(g);
    return m;
}

OccupancyTable exact_occupancy(const TabularMDP& mdp, const TabularPolicy& policy, double gamma) {
    check_inputs(mdp, policy, gamma);
    const Matrix p_sa = stacked_transitions(mdp);
    OccupancyTable out;
    out.gamma = gamma;
    out.num_states = mdp.num_states;
    out.num_actions = mdp.num_actions;
    out.by_goal.reserve(mdp.num_states);
    for (int c = 0; c < mdp.num_states; ++c) {
        const auto lu = factor_resolvent(mdp, policy, c, gamma);
        // M = (1-gamma) P_sa R with R = (I - gamma P_pi)^-1, computed as
        // (R^T P_sa^T)^T to reuse the factorization.
        const Matrix rt_pt = lu.transpose().solve(p_sa.transpose());
        out.by_goal.push_back((1.0 - gamma) * rt_pt.transpose());
    }
    return out;
}

ExactQ exact_q(const TabularMDP& mdp, const TabularPolicy& policy, double gamma) {
    check_inputs(mdp, policy, gamma);
    const int n_s = mdp.num_states;
    const int n_a = mdp.num_actions;
    ExactQ out;
    out.gamma = gamma;
    out.num_states = n_s;
    out.num_actions = n_a;
    out.values.resize(n_s * n_a, n_s);
    for (int g = 0; g < n_s; ++g) {
        // reward r_g(s, a) = (1 - gamma) P(g | s, a)
        Matrix r(n_s, n_a);
        for (int a = 0; a < n_a; ++a) r.col(a) = (1.0 - gamma) * mdp.transition[a].col(g);
        const Vector r_pi = (policy.probs[g].cwiseProduct(r)).rowwise().sum();
        const Vector v = factor_resolvent(mdp, policy, g, gamma).solve(r_pi);
        for (int s = 0; s < n_s; ++s)
            for (int a = 0; a < n_a; ++a)
                out.values(s * n_a + a, g) = r(s, a) + gamma * mdp.transition[a].row(s).dot(v);
    }
    return out;
}

Matrix exact_v(const TabularMDP& mdp, const TabularPolicy& policy, double gamma) {
    const ExactQ q = exact_q(mdp, policy, gamma);
    Matrix v = Matrix::Zero(mdp.num_states, mdp.num_states);
    for (int g = 0; g < mdp.num_states; ++g)
        for (int s = 0; s < mdp.num_states; ++s)
            for (int a = 0; a < mdp.num_actions; ++a) v(s, g) += policy.probs[g](s, a) * q(s, a, g);
    return v;
}

Matrix monte_carlo_occupancy(const TabularMDP& mdp, const TabularPolicy& policy, int conditioning_goal,
                             double gamma, int rollouts_per_pair, Rng& rng) {
    check_inputs(mdp, policy, gamma);
    if (rollouts_per_pair < 1) throw ConfigError("monte_carlo_occupancy: need at least one rollout");
    if (conditioning_goal < 0 || conditioning_goal >= mdp.num_states)
        throw ConfigError("monte_carlo_occupancy: conditioning goal out of range");
    const int n_s = mdp.num_states;
    const int n_a = mdp.num_actions;
    std::vector<std::vector<double>> next(static_cast<std::size_t>(n_s * n_a));
    std::vector<std::vector<double>> act(static_cast<std::size_t>(n_s));
    for (int s = 0; s < n_s; ++s) {
        const RowVector pi = policy.probs[conditioning_goal].row(s);
        act[s].assign(pi.data(), pi.data() + n_a);
        for (int a = 0; a < n_a; ++a) {
            const RowVector row = mdp.transition[a].row(s);
            next[s * n_a + a].assign(row.data(), row.data() + n_s);
        }
    }
    const std::int64_t cap =
        gamma == 0.0 ? 1 : std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(std::log(1e-7) / std::log(gamma))));

    Matrix counts = Matrix::Zero(n_s * n_a, n_s);
    for (int s0 = 0; s0 < n_s; ++s0) {
        for (int a0 = 0; a0 < n_a; ++a0) {
            const int row = s0 * n_a + a0;
            for (int k = 0; k < rollouts_per_pair; ++k) {
                std::int64_t delta = 1;
                if (gamma > 0.0) {
                    const double u = rng.uniform_open_low();
                    delta = 1 + static_cast<std::int64_t>(std::floor(std::log(u) / std::log(gamma)));
                    delta = std::min(delta, cap);
                }
                int s = static_cast<int>(sample_categorical(next[row], rng));
                for (std::int64_t step = 1; step < delta; ++step) {
                    const int a = static_cast<int>(sample_categorical(act[s], rng));
                    s = static_cast<int>(sample_categorical(next[s * n_a + a], rng));
                }
                counts(row, s) += 1.0;
            }
        }
    }
    return counts / static_cast<double>(rollouts_per_pair);
}

TableCritic bayes_optimal_critic(const Matrix& occupancy, int num_actions, const Vector& negative_marginal) {
    if (num_actions < 1 || occupancy.rows() % num_actions != 0)
        throw ShapeError("bayes_optimal_critic: occupancy rows must be S * A");
    const int n_s = static_cast<int>(occupancy.rows() / num_actions);
    if (occupancy.cols() != n_s || negative_marginal.size() != n_s)
        throw ShapeError("bayes_optimal_critic: occupancy must be (S*A) x S with an S-entry marginal");
    for (int g = 0; g < n_s; ++g)
        if (!(negative_marginal(g) > 0.0))
            throw ConfigError("bayes_optimal_critic: negative marginal must be positive at every goal");
    TableCritic f(n_s, num_actions);
    for (Eigen::Index r = 0; r < occupancy.rows(); ++r)
        for (int g = 0; g < n_s; ++g) {
            const double m = occupancy(r, g);
            f.values(r, g) = m > 0.0 ? std::log(m / negative_marginal(g)) : kCriticSentinel;
        }
    return f;
}

}  // namespace crl
