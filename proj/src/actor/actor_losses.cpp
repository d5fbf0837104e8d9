#include "crl/actor/actor_losses.hpp"

namespace crl {

ActorLoss actor_loss(const GoalPolicy& policy, const ContrastiveCritic& critic, const Matrix& states,
                     const Matrix& goals, double entropy_coeff, Rng& rng) {
    return actor_loss(policy, critic, states, goals, entropy_coeff, policy.draw_noise(states.rows(), rng));
}

ActorLoss actor_loss(const GoalPolicy& policy, const ContrastiveCritic& critic, const Matrix& states,
                     const Matrix& goals, double entropy_coeff, const Matrix& noise) {
    if (entropy_coeff < 0.0) throw ConfigError("actor_loss: entropy_coeff must be non-negative");
    auto obj = policy.reparam_objective(states, goals, critic.scorer(states, goals), entropy_coeff, noise);
    return {obj.loss, std::move(obj.grads)};
}

ActionScorer min_critic_scorer(std::span<const ContrastiveCritic> critics, const Matrix& states,
                               const Matrix& goals) {
    if (critics.empty()) throw ConfigError("min_critic_scorer: at least one critic required");
    std::vector<ActionScorer> scorers;
    for (const auto& c : critics) scorers.push_back(c.scorer(states, goals));
    return [scorers = std::move(scorers)](const Matrix& actions) {
        ActionScore best = scorers.front()(actions);
        for (std::size_t k = 1; k < scorers.size(); ++k) {
            const ActionScore s = scorers[k](actions);
            for (Eigen::Index r = 0; r < s.value.size(); ++r) {
                if (s.value(r) < best.value(r)) {
                    best.value(r) = s.value(r);
                    best.d_action.row(r) = s.d_action.row(r);
                }
            }
        }
        return best;
    };
}

ActorLoss offline_actor_loss(const GoalPolicy& policy, std::span<const ContrastiveCritic> critics,
                             const Matrix& states, const Matrix& dataset_actions, const Matrix& goals, double lambda,
                             Rng& rng) {
    return offline_actor_loss(policy, critics, states, dataset_actions, goals, lambda,
                              policy.draw_noise(states.rows(), rng));
}

ActorLoss offline_actor_loss(const GoalPolicy& policy, std::span<const ContrastiveCritic> critics,
                             const Matrix& states, const Matrix& dataset_actions, const Matrix& goals, double lambda,
                             const Matrix& noise) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("offline_actor_loss: lambda must be in [0, 1]");
    if (critics.empty()) throw ConfigError("offline_actor_loss: critic list is empty");
    const auto b = states.rows();
    if (b < 1) throw ShapeError("offline_actor_loss: empty batch");
    const double inv_b = 1.0 / static_cast<double>(b);

    auto bc = policy.log_prob_grad(states, goals, dataset_actions, Vector::Constant(b, -lambda * inv_b));
    ActorLoss out;
    out.loss = -(lambda * (bc.log_probs.sum() * inv_b));
    out.grads = std::move(bc.grads);

    const double critic_weight = 1.0 - lambda;
    if (critic_weight != 0.0) {
        auto q = policy.reparam_objective(states, goals, min_critic_scorer(critics, states, goals), 0.0, noise);
        out.loss -= critic_weight * q.mean_score;
        axpy(out.grads, q.grads, critic_weight);
    }
    return out;
}

}  // namespace crl
