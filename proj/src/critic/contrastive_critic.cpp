#include "crl/critic/contrastive_critic.hpp"

namespace crl {

ContrastiveCritic::ContrastiveCritic(int obs_dim, int goal_dim, ActionSpace action, const std::vector<int>& hidden,
                                     int repr_dim, Rng& rng)
    : action_(action), obs_dim_(obs_dim) {
    if (repr_dim <= 0) throw ConfigError("ContrastiveCritic: repr_dim must be positive");
    std::vector<int> sa_sizes{obs_dim + action.encoded_dim()};
    sa_sizes.insert(sa_sizes.end(), hidden.begin(), hidden.end());
    sa_sizes.push_back(repr_dim);
    std::vector<int> g_sizes{goal_dim};
    g_sizes.insert(g_sizes.end(), hidden.begin(), hidden.end());
    g_sizes.push_back(repr_dim);
    sa_encoder = Mlp(sa_sizes, rng);
    g_encoder = Mlp(g_sizes, rng);
}

ContrastiveCritic::ContrastiveCritic(Mlp sa, Mlp g, ActionSpace action, int obs_dim)
    : sa_encoder(std::move(sa)), g_encoder(std::move(g)), action_(action), obs_dim_(obs_dim) {
    if (sa_encoder.input_size() != obs_dim + action.encoded_dim())
        throw ConfigError("ContrastiveCritic: sa encoder input size mismatch");
    if (sa_encoder.output_size() != g_encoder.output_size())
        throw ConfigError("ContrastiveCritic: representation sizes differ");
}

Matrix ContrastiveCritic::sa_input(const Matrix& states, const Matrix& actions) const {
    require_cols(states, obs_dim_, "critic states");
    if (actions.rows() != states.rows()) throw ShapeError("critic: state/action batch sizes differ");
    return hconcat(states, encode_actions(action_, actions));
}

Matrix ContrastiveCritic::sa_repr(const Matrix& states, const Matrix& actions) const {
    return sa_encoder.forward(sa_input(states, actions));
}

Matrix ContrastiveCritic::g_repr(const Matrix& goals) const { return g_encoder.forward(goals); }

ActionScorer ContrastiveCritic::scorer(const Matrix& states, const Matrix& goals) const {
    require_cols(states, obs_dim_, "critic scorer states");
    Matrix psi = g_repr(goals);
    return [this, states, psi = std::move(psi)](const Matrix& encoded_actions) {
        if (encoded_actions.rows() != states.rows()) throw ShapeError("critic scorer: batch size mismatch");
        Mlp::Tape tape;
        const Matrix phi = sa_encoder.forward(hconcat(states, encoded_actions), tape);
        ActionScore score;
        score.value = phi.cwiseProduct(psi).rowwise().sum();
        const Matrix d_input = sa_encoder.backward(tape, psi).input;
        score.d_action = d_input.rightCols(encoded_actions.cols());
        return score;
    };
}

Matrix logits_matrix(const ContrastiveCritic& critic, const Matrix& states, const Matrix& actions,
                     const Matrix& goals) {
    if (goals.rows() != states.rows()) throw ShapeError("logits_matrix: batch sizes differ");
    return critic.sa_repr(states, actions) * critic.g_repr(goals).transpose();
}

Vector critic_values(const ContrastiveCritic& critic, const Matrix& states, const Matrix& actions,
                     const Matrix& goals) {
    if (goals.rows() != states.rows()) throw ShapeError("critic_values: batch sizes differ");
    return critic.sa_repr(states, actions).cwiseProduct(critic.g_repr(goals)).rowwise().sum();
}

double critic_value(const ContrastiveCritic& critic, const Vector& state, const Vector& action, const Vector& goal) {
    return critic_values(critic, state.transpose(), action.transpose(), goal.transpose())(0);
}

}  // namespace crl
