#include "crl/critic/table_critic.hpp"

#include <cmath>

#include "crl/numcore/losses.hpp"

namespace crl {

namespace {

void check_shapes(const TableCritic& critic, const Vector& sa_weights, const Vector& goal_weights) {
    const auto sa = static_cast<Eigen::Index>(critic.num_states) * critic.num_actions;
    if (critic.values.rows() != sa || critic.values.cols() != critic.num_states)
        throw ShapeError("TableCritic: values have the wrong shape");
    if (sa_weights.size() != sa) throw ShapeError("table loss: sa_weights length mismatch");
    if (goal_weights.size() != critic.num_states) throw ShapeError("table loss: goal weight length mismatch");
}

/// sum_sa w(sa) sum_g [pos(sa,g) log s(f) + neg(sa,g) log(1 - s(f))], negated.
TableLoss weighted_bce(const Matrix& f, const Matrix& pos, const Matrix& neg, const Vector& sa_weights) {
    TableLoss out;
    out.grad.resize(f.rows(), f.cols());
    double total = 0.0;
    for (Eigen::Index r = 0; r < f.rows(); ++r) {
        for (Eigen::Index g = 0; g < f.cols(); ++g) {
            const double x = f(r, g);
            double term = 0.0;
            if (pos(r, g) != 0.0) term += pos(r, g) * log_sigmoid(x);
            if (neg(r, g) != 0.0) term += neg(r, g) * log_sigmoid(-x);
            total += sa_weights(r) * term;
            out.grad(r, g) = -sa_weights(r) * (pos(r, g) * (1.0 - sigmoid(x)) - neg(r, g) * sigmoid(x));
        }
    }
    out.loss = -total;
    return out;
}

/// W(sa, g) = sum_s' P(s'|s,a) sum_a' pi(a'|s',g) exp f(s',a',g).
Matrix bootstrap_weights(const TableCritic& critic, const TabularMDP& mdp, const TabularPolicy& policy) {
    const int S = mdp.num_states, A = mdp.num_actions;
    Matrix v(S, S);  // v(s', g) = E_{a'~pi(.|s',g)} exp f(s',a',g)
    for (int g = 0; g < S; ++g)
        for (int s = 0; s < S; ++s) {
            double acc = 0.0;
            for (int a = 0; a < A; ++a) acc += policy.probs[g](s, a) * std::exp(critic(s, a, g));
            v(s, g) = acc;
        }
    Matrix w(S * A, S);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) w.row(TableCritic::row(s, a, A)) = mdp.transition[a].row(s) * v;
    return w;
}

Matrix next_state_table(const TabularMDP& mdp) {
    const int S = mdp.num_states, A = mdp.num_actions;
    Matrix p(S * A, S);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) p.row(TableCritic::row(s, a, A)) = mdp.transition[a].row(s);
    return p;
}

}  // namespace

TableLoss nce_expected_loss(const TableCritic& critic, const Matrix& occupancy, const Vector& sa_weights,
                            const Vector& negative_marginal) {
    check_shapes(critic, sa_weights, negative_marginal);
    require_same_shape(occupancy, critic.values, "nce_expected_loss occupancy");
    const Matrix neg = Vector::Ones(occupancy.rows()) * negative_marginal.transpose();
    return weighted_bce(critic.values, occupancy, neg, sa_weights);
}

TableLoss c_learning_expected_loss(const TableCritic& critic, const TabularMDP& mdp, const TabularPolicy& policy,
                                   const Vector& sa_weights, const Vector& goal_weights) {
    check_shapes(critic, sa_weights, goal_weights);
    const double gamma = mdp.gamma;
    const Matrix goal_row = Vector::Ones(critic.values.rows()) * goal_weights.transpose();
    const Matrix pos = (1.0 - gamma) * next_state_table(mdp) +
                       gamma * bootstrap_weights(critic, mdp, policy).cwiseProduct(goal_row);
    return weighted_bce(critic.values, pos, goal_row, sa_weights);
}

TableLoss nce_plus_c_expected_loss(const TableCritic& critic, const TabularMDP& mdp, const TabularPolicy& policy,
                                   const Matrix& occupancy, const Vector& sa_weights, const Vector& goal_weights) {
    check_shapes(critic, sa_weights, goal_weights);
    require_same_shape(occupancy, critic.values, "nce_plus_c_expected_loss occupancy");
    const double gamma = mdp.gamma;
    const Matrix goal_row = Vector::Ones(critic.values.rows()) * goal_weights.transpose();
    const Matrix mixture = ((1.0 - gamma) * next_state_table(mdp) + occupancy) / (2.0 - gamma);
    const Matrix pos = (2.0 - gamma) * mixture + gamma * bootstrap_weights(critic, mdp, policy).cwiseProduct(goal_row);
    return weighted_bce(critic.values, pos, 2.0 * goal_row, sa_weights);
}

}  // namespace crl
