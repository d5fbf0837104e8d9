#pragma once

#include <string>
#include <vector>

#include "crl/actor/goal_policy.hpp"
#include "crl/envs/env_spec.hpp"
#include "crl/numcore/mlp.hpp"

namespace crl {

/// f(s, a, g) = <phi(s, a), psi(g)>. Both encoders are plain MLPs whose raw
/// outputs are the representations: no normalization, temperature or final
/// activation, and no target copies.
class ContrastiveCritic {
public:
    ContrastiveCritic() = default;
    ContrastiveCritic(int obs_dim, int goal_dim, ActionSpace action, const std::vector<int>& hidden, int repr_dim,
                      Rng& rng);
    /// Wraps existing encoders (e.g. zero or hand-built networks in tests).
    ContrastiveCritic(Mlp sa_encoder, Mlp g_encoder, ActionSpace action, int obs_dim);

    Mlp sa_encoder;
    Mlp g_encoder;

    const ActionSpace& action_space() const { return action_; }
    int obs_dim() const { return obs_dim_; }
    int goal_dim() const { return g_encoder.input_size(); }
    int repr_dim() const { return g_encoder.output_size(); }

    /// [state, encoded action]; actions are in stored form.
    Matrix sa_input(const Matrix& states, const Matrix& actions) const;
    Matrix sa_repr(const Matrix& states, const Matrix& actions) const;
    Matrix g_repr(const Matrix& goals) const;

    std::vector<std::string> sa_param_names() const { return sa_encoder.param_names("critic.sa"); }
    std::vector<std::string> g_param_names() const { return g_encoder.param_names("critic.g"); }

    /// Critic as a scorer of encoded actions at fixed (states, goals), with
    /// d f / d action from the sa-encoder input gradient.
    ActionScorer scorer(const Matrix& states, const Matrix& goals) const;

private:
    ActionSpace action_;
    int obs_dim_ = 0;
};

struct CriticGrads {
    ParamList sa;
    ParamList g;
};

struct CriticLoss {
    double loss = 0.0;
    CriticGrads grads;
};

/// B x B matrix of <phi(s_i, a_i), psi(g_j)>; goal representations are computed
/// once and shared by every row.
Matrix logits_matrix(const ContrastiveCritic& critic, const Matrix& states, const Matrix& actions,
                     const Matrix& goals);

/// Row-wise f(s_i, a_i, g_i).
Vector critic_values(const ContrastiveCritic& critic, const Matrix& states, const Matrix& actions,
                     const Matrix& goals);
double critic_value(const ContrastiveCritic& critic, const Vector& state, const Vector& action, const Vector& goal);

}  // namespace crl
