#include "crl/critic/critic_losses.hpp"

#include <algorithm>
#include <cmath>

#include "crl/numcore/losses.hpp"

namespace crl {

namespace {

struct Forward {
    Mlp::Tape sa_tape;
    Mlp::Tape g_tape;
    Matrix sa;
    Matrix g;
};

Forward forward_pair(const ContrastiveCritic& critic, const Matrix& states, const Matrix& actions,
                     const Matrix& goals) {
    Forward fw;
    fw.sa = critic.sa_encoder.forward(critic.sa_input(states, actions), fw.sa_tape);
    fw.g = critic.g_encoder.forward(goals, fw.g_tape);
    return fw;
}

CriticGrads backward_pair(const ContrastiveCritic& critic, const Forward& fw, const Matrix& d_sa, const Matrix& d_g) {
    return {critic.sa_encoder.backward(fw.sa_tape, d_sa).params, critic.g_encoder.backward(fw.g_tape, d_g).params};
}

void require_batch(const Matrix& states, const Matrix& goals, const char* what) {
    if (states.rows() < 2) throw ShapeError(std::string(what) + ": batch size must be at least 2");
    if (goals.rows() != states.rows()) throw ShapeError(std::string(what) + ": batch sizes differ");
}

}  // namespace

CriticLoss nce_loss(const ContrastiveCritic& critic, const Matrix& states, const Matrix& actions,
                    const Matrix& future_goals) {
    require_batch(states, future_goals, "nce_loss");
    const Forward fw = forward_pair(critic, states, actions, future_goals);
    const Matrix logits = fw.sa * fw.g.transpose();
    const auto b = logits.rows();
    const LossAndGrad bce = sigmoid_bce_with_logits(logits, Matrix::Identity(b, b));
    return {bce.loss, backward_pair(critic, fw, bce.grad * fw.g, bce.grad.transpose() * fw.sa)};
}

CriticLoss cpc_loss(const ContrastiveCritic& critic, const Matrix& states, const Matrix& actions,
                    const Matrix& future_goals, double reg_coeff) {
    require_batch(states, future_goals, "cpc_loss");
    if (reg_coeff < 0.0) throw ConfigError("cpc_loss: reg_coeff must be non-negative");
    const Forward fw = forward_pair(critic, states, actions, future_goals);
    const Matrix logits = fw.sa * fw.g.transpose();
    const auto b = logits.rows();
    const double inv_b = 1.0 / static_cast<double>(b);
    const Vector lse = logsumexp_rows(logits);
    const Matrix p = softmax_rows(logits);
    double ce = 0.0, reg = 0.0;
    Matrix d_logits(b, b);
    for (Eigen::Index i = 0; i < b; ++i) {
        ce += lse(i) - logits(i, i);
        reg += lse(i) * lse(i);
        d_logits.row(i) = inv_b * (1.0 + 2.0 * reg_coeff * lse(i)) * p.row(i);
        d_logits(i, i) -= inv_b;
    }
    const double loss = ce * inv_b + reg_coeff * reg * inv_b;
    return {loss, backward_pair(critic, fw, d_logits * fw.g, d_logits.transpose() * fw.sa)};
}

namespace {

/// Shared body of the two TD-style losses. Per row: positive logit against
/// `positive_goals`, and a goal logit against `batch.goals` that carries the
/// bootstrapped weight and the negative label.
CriticLoss td_style_loss(const ContrastiveCritic& critic, const TdInputs& batch, const Matrix& positive_goals,
                         double positive_weight, double td_weight, double negative_weight, double td_weight_clip,
                         NcePlusCTerms* terms) {
    const auto b = batch.states.rows();
    if (b < 1) throw ShapeError("td loss: empty batch");
    if (positive_goals.rows() != b || batch.goals.rows() != b || batch.next_states.rows() != b ||
        batch.next_actions.rows() != b)
        throw ShapeError("td loss: batch sizes differ");
    if (!(td_weight_clip > 0.0)) throw ConfigError("td loss: td_weight_clip must be positive");

    // Bootstrapped weights carry no gradient.
    Vector w = critic_values(critic, batch.next_states, batch.next_actions, batch.goals);
    for (Eigen::Index i = 0; i < b; ++i) w(i) = std::clamp(std::exp(w(i)), 0.0, td_weight_clip);

    Matrix goals(2 * b, positive_goals.cols());
    goals << positive_goals, batch.goals;
    const Forward fw = forward_pair(critic, batch.states, batch.actions, goals);
    const auto psi_pos = fw.g.topRows(b);
    const auto psi_goal = fw.g.bottomRows(b);

    const double inv_b = 1.0 / static_cast<double>(b);
    double sum_pos = 0.0, sum_td = 0.0, sum_neg = 0.0;
    Vector d_pos(b), d_goal(b);
    for (Eigen::Index i = 0; i < b; ++i) {
        const double f_pos = fw.sa.row(i).dot(psi_pos.row(i));
        const double f_goal = fw.sa.row(i).dot(psi_goal.row(i));
        sum_pos += log_sigmoid(f_pos);
        sum_td += w(i) * log_sigmoid(f_goal);
        sum_neg += log_sigmoid(-f_goal);
        d_pos(i) = -inv_b * positive_weight * (1.0 - sigmoid(f_pos));
        d_goal(i) = -inv_b * (td_weight * w(i) * (1.0 - sigmoid(f_goal)) - negative_weight * sigmoid(f_goal));
    }
    const double mean_pos = sum_pos * inv_b, mean_td = sum_td * inv_b, mean_neg = sum_neg * inv_b;
    if (terms) *terms = {mean_pos, mean_td, mean_neg};

    const Matrix d_sa = d_pos.asDiagonal() * psi_pos + d_goal.asDiagonal() * psi_goal;
    Matrix d_g(2 * b, fw.g.cols());
    d_g << d_pos.asDiagonal() * fw.sa, d_goal.asDiagonal() * fw.sa;
    const double loss = -(positive_weight * mean_pos + td_weight * mean_td + negative_weight * mean_neg);
    return {loss, backward_pair(critic, fw, d_sa, d_g)};
}

}  // namespace

CriticLoss c_learning_loss(const ContrastiveCritic& critic, const TdInputs& batch, double gamma,
                           double td_weight_clip) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("c_learning_loss: gamma must be in [0, 1)");
    const Matrix next_goals = batch.next_states.leftCols(critic.goal_dim());
    return td_style_loss(critic, batch, next_goals, 1.0 - gamma, gamma, 1.0, td_weight_clip, nullptr);
}

CriticLoss c_learning_loss(const ContrastiveCritic& critic, const GoalPolicy& policy, TdInputs batch, double gamma,
                           double td_weight_clip, Rng& rng) {
    batch.next_actions = policy.sample(batch.next_states, batch.goals, rng).actions;
    return c_learning_loss(critic, batch, gamma, td_weight_clip);
}

CriticLoss nce_plus_c_loss(const ContrastiveCritic& critic, const TdInputs& batch, const Matrix& mixture_goals,
                           double gamma, double td_weight_clip, NcePlusCTerms* terms) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("nce_plus_c_loss: gamma must be in [0, 1)");
    return td_style_loss(critic, batch, mixture_goals, 2.0 - gamma, gamma, 2.0, td_weight_clip, terms);
}

}  // namespace crl
