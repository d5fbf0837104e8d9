#include "crl/baselines/gcbc.hpp"

namespace crl {

ActorLoss gcbc_loss(const GoalPolicy& policy, const Matrix& states, const Matrix& actions,
                    const Matrix& future_goals) {
    const auto b = states.rows();
    if (b < 1) throw ShapeError("gcbc_loss: empty batch");
    const double inv_b = 1.0 / static_cast<double>(b);
    auto lp = policy.log_prob_grad(states, future_goals, actions, Vector::Constant(b, -1.0 * inv_b));
    return {-(lp.log_probs.sum() * inv_b), std::move(lp.grads)};
}

}  // namespace crl
