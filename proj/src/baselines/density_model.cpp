#include "crl/baselines/density_model.hpp"

#include <cmath>

#include "crl/numcore/losses.hpp"

namespace crl {

namespace {
constexpr double kLog2Pi = 1.83787706640934548356;
}

DensityModel::DensityModel(int obs_dim, ActionSpace action, Head head, int outcome_dim,
                           const std::vector<int>& hidden, Rng& rng, double variance_floor)
    : action_(action), head_(head), obs_dim_(obs_dim), outcome_dim_(outcome_dim), variance_floor_(variance_floor) {
    if (outcome_dim <= 0) throw ConfigError("DensityModel: outcome_dim must be positive");
    if (!(variance_floor > 0.0)) throw ConfigError("DensityModel: variance floor must be positive");
    std::vector<int> sizes{obs_dim + action.encoded_dim()};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(head == Head::gaussian ? 2 * outcome_dim : outcome_dim);
    net_ = Mlp(sizes, rng);
}

Matrix DensityModel::input(const Matrix& states, const Matrix& actions) const {
    require_cols(states, obs_dim_, "DensityModel states");
    return hconcat(states, encode_actions(action_, actions));
}

std::pair<Vector, Matrix> DensityModel::log_prob_and_output_grad(const Matrix& out, const Matrix& targets) const {
    const auto b = out.rows();
    Vector logq(b);
    Matrix d_out = Matrix::Zero(out.rows(), out.cols());
    if (head_ == Head::categorical) {
        require_cols(targets, 1, "DensityModel categorical targets");
        const Vector lse = logsumexp_rows(out);
        const Matrix p = softmax_rows(out);
        for (Eigen::Index r = 0; r < b; ++r) {
            const auto k = static_cast<Eigen::Index>(std::lround(targets(r, 0)));
            if (k < 0 || k >= outcome_dim_) throw ShapeError("DensityModel: target index out of range");
            logq(r) = out(r, k) - lse(r);
            d_out.row(r) = -p.row(r);
            d_out(r, k) += 1.0;
        }
        return {logq, d_out};
    }
    require_cols(targets, outcome_dim_, "DensityModel gaussian targets");
    const int d = outcome_dim_;
    for (Eigen::Index r = 0; r < b; ++r) {
        double acc = 0.0;
        for (int k = 0; k < d; ++k) {
            const double raw = out(r, d + k);
            const double var = variance_floor_ + softplus(raw);
            const double diff = targets(r, k) - out(r, k);
            acc += -0.5 * (diff * diff / var + std::log(var) + kLog2Pi);
            d_out(r, k) = diff / var;
            d_out(r, d + k) = 0.5 * (diff * diff / (var * var) - 1.0 / var) * sigmoid(raw);
        }
        logq(r) = acc;
    }
    return {logq, d_out};
}

Vector DensityModel::log_prob(const Matrix& states, const Matrix& actions, const Matrix& targets) const {
    return log_prob_and_output_grad(net_.forward(input(states, actions)), targets).first;
}

Matrix DensityModel::probabilities(const Matrix& states, const Matrix& actions) const {
    if (head_ != Head::categorical) throw ConfigError("DensityModel::probabilities: categorical head only");
    return softmax_rows(net_.forward(input(states, actions)));
}

std::pair<Matrix, Matrix> DensityModel::gaussian_params(const Matrix& states, const Matrix& actions) const {
    if (head_ != Head::gaussian) throw ConfigError("DensityModel::gaussian_params: gaussian head only");
    const Matrix out = net_.forward(input(states, actions));
    Matrix var = out.rightCols(outcome_dim_).unaryExpr([this](double x) { return variance_floor_ + softplus(x); });
    return {out.leftCols(outcome_dim_), var};
}

ActionScorer DensityModel::scorer(const Matrix& states, const Matrix& goals) const {
    require_cols(states, obs_dim_, "DensityModel scorer states");
    return [this, states, goals](const Matrix& encoded_actions) {
        Mlp::Tape tape;
        const Matrix out = net_.forward(hconcat(states, encoded_actions), tape);
        auto [logq, d_out] = log_prob_and_output_grad(out, goals);
        ActionScore s;
        s.value = std::move(logq);
        s.d_action = net_.backward(tape, d_out).input.rightCols(encoded_actions.cols());
        return s;
    };
}

DensityLoss density_loss(const DensityModel& model, const Matrix& states, const Matrix& actions,
                         const Matrix& future_targets) {
    const auto b = states.rows();
    if (b < 1 || future_targets.rows() != b) throw ShapeError("density_loss: batch sizes differ or empty");
    Mlp::Tape tape;
    const Matrix out = model.net().forward(model.input(states, actions), tape);
    auto [logq, d_out] = model.log_prob_and_output_grad(out, future_targets);
    const double inv_b = 1.0 / static_cast<double>(b);
    return {-logq.sum() * inv_b, model.net().backward(tape, -inv_b * d_out).params};
}

DensityLoss density_loss_soft(const DensityModel& model, const Matrix& states, const Matrix& actions,
                              const Matrix& target_probs, const Vector& row_weights) {
    if (model.head() != DensityModel::Head::categorical) throw ConfigError("density_loss_soft: categorical head only");
    const auto b = states.rows();
    if (target_probs.rows() != b || row_weights.size() != b) throw ShapeError("density_loss_soft: batch sizes differ");
    require_cols(target_probs, model.outcome_dim(), "density_loss_soft target_probs");
    Mlp::Tape tape;
    const Matrix out = model.net().forward(model.input(states, actions), tape);
    const Vector lse = logsumexp_rows(out);
    const Matrix p = softmax_rows(out);
    double loss = 0.0;
    Matrix d_out(out.rows(), out.cols());
    for (Eigen::Index r = 0; r < b; ++r) {
        const double mass = target_probs.row(r).sum();
        for (Eigen::Index k = 0; k < out.cols(); ++k) {
            if (target_probs(r, k) != 0.0) loss -= row_weights(r) * target_probs(r, k) * (out(r, k) - lse(r));
        }
        d_out.row(r) = row_weights(r) * (mass * p.row(r) - target_probs.row(r));
    }
    return {loss, model.net().backward(tape, d_out).params};
}

ActorLoss mb_actor_loss(const GoalPolicy& policy, const DensityModel& model, const Matrix& states,
                        const Matrix& goals, double entropy_coeff, const Matrix& noise) {
    auto obj = policy.reparam_objective(states, goals, model.scorer(states, goals), entropy_coeff, noise);
    return {obj.loss, std::move(obj.grads)};
}

ActorLoss mb_actor_loss(const GoalPolicy& policy, const DensityModel& model, const Matrix& states,
                        const Matrix& goals, double entropy_coeff, Rng& rng) {
    return mb_actor_loss(policy, model, states, goals, entropy_coeff, policy.draw_noise(states.rows(), rng));
}

}  // namespace crl
