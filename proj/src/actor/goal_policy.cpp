#include "crl/actor/goal_policy.hpp"

#include <cmath>
#include <numbers>

#include "crl/numcore/losses.hpp"

namespace crl {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;
// Dataset actions at the box boundary are pulled inside before atanh.
constexpr double kTanhClip = 1.0 - 1e-6;

}  // namespace

double log1m_tanh_sq(double u) { return 2.0 * (std::numbers::ln2 - u - softplus(-2.0 * u)); }

GoalPolicy::GoalPolicy(int obs_dim, int goal_dim, ActionSpace action, const std::vector<int>& hidden, Rng& rng,
                       double min_std)
    : action_(action), obs_dim_(obs_dim), goal_dim_(goal_dim), min_std_(min_std) {
    if (!(min_std_ > 0.0)) throw ConfigError("GoalPolicy: min_std must be positive");
    std::vector<int> sizes{obs_dim + goal_dim};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(action_.kind == ActionKind::continuous ? 2 * action_.size : action_.size);
    net_ = Mlp(sizes, rng);
}

Matrix GoalPolicy::policy_input(const Matrix& states, const Matrix& goals) const {
    require_cols(states, obs_dim_, "GoalPolicy states");
    require_cols(goals, goal_dim_, "GoalPolicy goals");
    return hconcat(states, goals);
}

Matrix GoalPolicy::draw_noise(Eigen::Index rows, Rng& rng) const {
    Matrix z(rows, action_.kind == ActionKind::continuous ? action_.size : 0);
    for (Eigen::Index r = 0; r < z.rows(); ++r)
        for (Eigen::Index c = 0; c < z.cols(); ++c) z(r, c) = rng.normal();
    return z;
}

GoalPolicy::Sample GoalPolicy::sample(const Matrix& states, const Matrix& goals, Rng& rng) const {
    if (action_.kind == ActionKind::continuous) return sample_with_noise(states, goals, draw_noise(states.rows(), rng));
    const Matrix p = probabilities(states, goals);
    Sample out;
    out.actions.resize(p.rows(), 1);
    out.log_probs.resize(p.rows());
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
        const Eigen::RowVectorXd row = p.row(r);
        const auto a = sample_categorical(std::span<const double>(row.data(), row.size()), rng);
        out.actions(r, 0) = static_cast<double>(a);
        out.log_probs(r) = std::log(row(static_cast<Eigen::Index>(a)));
    }
    return out;
}

GoalPolicy::Sample GoalPolicy::sample_with_noise(const Matrix& states, const Matrix& goals,
                                                 const Matrix& noise) const {
    if (action_.kind != ActionKind::continuous) throw ConfigError("sample_with_noise: continuous policies only");
    const Matrix out = net_.forward(policy_input(states, goals));
    require_same_shape(noise, out.leftCols(action_.size), "sample_with_noise noise");
    const int d = action_.size;
    Sample s;
    s.actions.resize(out.rows(), d);
    s.log_probs = Vector::Zero(out.rows());
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
        for (int k = 0; k < d; ++k) {
            const double std_dev = softplus(out(r, d + k)) + min_std_;
            const double u = out(r, k) + std_dev * noise(r, k);
            s.actions(r, k) = action_.bound * std::tanh(u);
            s.log_probs(r) += -0.5 * noise(r, k) * noise(r, k) - std::log(std_dev) - kHalfLog2Pi -
                              std::log(action_.bound) - log1m_tanh_sq(u);
        }
    }
    return s;
}

Matrix GoalPolicy::probabilities(const Matrix& states, const Matrix& goals) const {
    if (action_.kind != ActionKind::discrete) throw ConfigError("probabilities: discrete policies only");
    return softmax_rows(net_.forward(policy_input(states, goals)));
}

Vector GoalPolicy::log_prob(const Matrix& states, const Matrix& goals, const Matrix& actions) const {
    return log_prob_grad(states, goals, actions, Vector::Zero(states.rows())).log_probs;
}

GoalPolicy::LogProbGrad GoalPolicy::log_prob_grad(const Matrix& states, const Matrix& goals, const Matrix& actions,
                                                  const Vector& weights) const {
    require_cols(actions, action_.stored_dim(), "GoalPolicy actions");
    if (actions.rows() != states.rows() || weights.size() != states.rows())
        throw ShapeError("log_prob_grad: batch sizes differ");
    Mlp::Tape tape;
    const Matrix out = net_.forward(policy_input(states, goals), tape);
    LogProbGrad result;
    result.log_probs = Vector::Zero(out.rows());
    Matrix d_out = Matrix::Zero(out.rows(), out.cols());

    if (action_.kind == ActionKind::discrete) {
        const Vector lse = logsumexp_rows(out);
        const Matrix p = softmax_rows(out);
        for (Eigen::Index r = 0; r < out.rows(); ++r) {
            const auto a = static_cast<Eigen::Index>(std::lround(actions(r, 0)));
            if (a < 0 || a >= action_.size) throw ShapeError("log_prob_grad: discrete action out of range");
            result.log_probs(r) = out(r, a) - lse(r);
            d_out.row(r) = -weights(r) * p.row(r);
            d_out(r, a) += weights(r);
        }
    } else {
        const int d = action_.size;
        for (Eigen::Index r = 0; r < out.rows(); ++r) {
            for (int k = 0; k < d; ++k) {
                const double t = std::clamp(actions(r, k) / action_.bound, -kTanhClip, kTanhClip);
                const double u = std::atanh(t);
                const double mean = out(r, k);
                const double raw = out(r, d + k);
                const double std_dev = softplus(raw) + min_std_;
                const double diff = u - mean;
                result.log_probs(r) += -0.5 * diff * diff / (std_dev * std_dev) - std::log(std_dev) - kHalfLog2Pi -
                                       std::log(action_.bound) - log1m_tanh_sq(u);
                d_out(r, k) = weights(r) * diff / (std_dev * std_dev);
                const double d_std = diff * diff / (std_dev * std_dev * std_dev) - 1.0 / std_dev;
                d_out(r, d + k) = weights(r) * d_std * sigmoid(raw);
            }
        }
    }
    result.grads = net_.backward(tape, d_out).params;
    return result;
}

Matrix GoalPolicy::act_deterministic(const Matrix& states, const Matrix& goals) const {
    const Matrix out = net_.forward(policy_input(states, goals));
    if (action_.kind == ActionKind::discrete) {
        Matrix a(out.rows(), 1);
        for (Eigen::Index r = 0; r < out.rows(); ++r) {
            Eigen::Index best = 0;
            for (Eigen::Index c = 1; c < out.cols(); ++c)
                if (out(r, c) > out(r, best)) best = c;
            a(r, 0) = static_cast<double>(best);
        }
        return a;
    }
    return action_.bound * out.leftCols(action_.size).array().tanh().matrix();
}

GoalPolicy::Objective GoalPolicy::reparam_objective(const Matrix& states, const Matrix& goals,
                                                    const ActionScorer& scorer, double entropy_coeff,
                                                    Rng& rng) const {
    return reparam_objective(states, goals, scorer, entropy_coeff, draw_noise(states.rows(), rng));
}

GoalPolicy::Objective GoalPolicy::reparam_objective(const Matrix& states, const Matrix& goals,
                                                    const ActionScorer& scorer, double entropy_coeff,
                                                    const Matrix& noise) const {
    Mlp::Tape tape;
    const Matrix out = net_.forward(policy_input(states, goals), tape);
    const auto batch = out.rows();
    const double inv_b = 1.0 / static_cast<double>(batch);
    Matrix d_out = Matrix::Zero(out.rows(), out.cols());
    Objective obj;

    if (action_.kind == ActionKind::discrete) {
        // Exact expectation over the categorical distribution.
        const int num_actions = action_.size;
        Matrix scores(batch, num_actions);
        for (int a = 0; a < num_actions; ++a) {
            Matrix onehot = Matrix::Zero(batch, num_actions);
            onehot.col(a).setOnes();
            scores.col(a) = scorer(onehot).value;
        }
        const Matrix p = softmax_rows(out);
        const Vector lse = logsumexp_rows(out);
        double total_score = 0.0, total_logp = 0.0;
        for (Eigen::Index r = 0; r < batch; ++r) {
            // Row loss sum_a p_a c_a with c_a = -q_a + alpha * log p_a; the
            // d(log p)/d logit part integrates to zero under p.
            Eigen::RowVectorXd logp = out.row(r).array() - lse(r);
            Eigen::RowVectorXd c = -scores.row(r) + entropy_coeff * logp;
            const double baseline = p.row(r).dot(c);
            d_out.row(r) = inv_b * p.row(r).cwiseProduct((c.array() - baseline).matrix());
            total_score += p.row(r).dot(scores.row(r));
            total_logp += p.row(r).dot(logp);
        }
        obj.mean_score = total_score * inv_b;
        obj.mean_log_prob = total_logp * inv_b;
    } else {
        const int d = action_.size;
        require_same_shape(noise, out.leftCols(d), "reparam_objective noise");
        Matrix u(batch, d), t(batch, d), std_dev(batch, d);
        Vector logp = Vector::Zero(batch);
        for (Eigen::Index r = 0; r < batch; ++r) {
            for (int k = 0; k < d; ++k) {
                std_dev(r, k) = softplus(out(r, d + k)) + min_std_;
                u(r, k) = out(r, k) + std_dev(r, k) * noise(r, k);
                t(r, k) = std::tanh(u(r, k));
                logp(r) += -0.5 * noise(r, k) * noise(r, k) - std::log(std_dev(r, k)) - kHalfLog2Pi -
                           std::log(action_.bound) - log1m_tanh_sq(u(r, k));
            }
        }
        const Matrix actions = action_.bound * t;
        const ActionScore score = scorer(actions);
        if (score.value.size() != batch) throw ShapeError("reparam_objective: scorer returned wrong batch size");
        require_same_shape(score.d_action, actions, "reparam_objective scorer gradient");
        for (Eigen::Index r = 0; r < batch; ++r) {
            for (int k = 0; k < d; ++k) {
                const double d_u = inv_b * (-score.d_action(r, k) * action_.bound * (1.0 - t(r, k) * t(r, k)) +
                                            entropy_coeff * 2.0 * t(r, k));
                const double d_std = d_u * noise(r, k) - inv_b * entropy_coeff / std_dev(r, k);
                d_out(r, k) = d_u;
                d_out(r, d + k) = d_std * sigmoid(out(r, d + k));
            }
        }
        obj.mean_score = score.value.mean();
        obj.mean_log_prob = logp.mean();
    }
    obj.loss = -obj.mean_score + entropy_coeff * obj.mean_log_prob;
    obj.grads = net_.backward(tape, d_out).params;
    return obj;
}

}  // namespace crl
