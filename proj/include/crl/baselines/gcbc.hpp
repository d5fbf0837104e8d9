#pragma once

#include "crl/actor/actor_losses.hpp"
#include "crl/actor/goal_policy.hpp"

namespace crl {

struct GcbcAgent {
    GoalPolicy policy;
};

/// Goal-conditioned behavioral cloning: -mean log pi(a | s, g = s_f+).
ActorLoss gcbc_loss(const GoalPolicy& policy, const Matrix& states, const Matrix& actions,
                    const Matrix& future_goals);

}  // namespace crl
