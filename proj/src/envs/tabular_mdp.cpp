#include "crl/envs/tabular_mdp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace crl {

Matrix encode_actions(const ActionSpace& space, const Matrix& actions) {
    require_cols(actions, space.stored_dim(), "encode_actions");
    if (space.kind == ActionKind::continuous) return actions;
    Matrix out = Matrix::Zero(actions.rows(), space.size);
    for (Eigen::Index r = 0; r < actions.rows(); ++r) {
        const auto a = static_cast<Eigen::Index>(std::lround(actions(r, 0)));
        if (a < 0 || a >= space.size) throw ShapeError("encode_actions: discrete action out of range");
        out(r, a) = 1.0;
    }
    return out;
}

Vector goal_slice(const Vector& observation, const EnvSpec& spec) { return observation.head(spec.goal_dim); }

Matrix goal_slice(const Matrix& observations, const EnvSpec& spec) {
    return observations.leftCols(spec.goal_dim);
}

double goal_distance(const Vector& observation, const Vector& goal, const EnvSpec& spec) {
    if (goal.size() != spec.goal_dim) throw ShapeError("goal_distance: goal has wrong dimension");
    return (observation.head(spec.goal_dim) - goal).norm();
}

bool success(const Vector& observation, const Vector& goal, const EnvSpec& spec) {
    return goal_distance(observation, goal, spec) <= spec.success_radius;
}

namespace {

void check_distribution(const Eigen::Ref<const Eigen::RowVectorXd>& p, const std::string& what) {
    if ((p.array() < 0.0).any()) throw ConfigError(what + " has negative entries");
    if (std::abs(p.sum() - 1.0) > 1e-12) throw ConfigError(what + " does not sum to 1");
}

}  // namespace

void TabularMDP::validate() const {
    if (num_states <= 0 || num_actions <= 0) throw ConfigError("TabularMDP: empty state or action set");
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("TabularMDP: gamma must be in (0, 1)");
    if (static_cast<int>(transition.size()) != num_actions) throw ConfigError("TabularMDP: one matrix per action");
    for (int a = 0; a < num_actions; ++a) {
        if (transition[a].rows() != num_states || transition[a].cols() != num_states)
            throw ConfigError("TabularMDP: transition matrix has wrong shape");
        for (int s = 0; s < num_states; ++s)
            check_distribution(transition[a].row(s),
                               "transition row (s=" + std::to_string(s) + ", a=" + std::to_string(a) + ")");
    }
    if (initial_distribution.size() != num_states || goal_distribution.size() != num_states)
        throw ConfigError("TabularMDP: p0 / p_g have wrong length");
    check_distribution(initial_distribution.transpose(), "initial distribution");
    check_distribution(goal_distribution.transpose(), "goal distribution");
}

TabularMDP random_tabular_mdp(Rng& rng, int num_states, int num_actions, double gamma) {
    TabularMDP mdp;
    mdp.num_states = num_states;
    mdp.num_actions = num_actions;
    mdp.gamma = gamma;
    for (int a = 0; a < num_actions; ++a) {
        Matrix p(num_states, num_states);
        for (int s = 0; s < num_states; ++s) {
            for (int t = 0; t < num_states; ++t) p(s, t) = -std::log(rng.uniform_open_low());
            p.row(s) /= p.row(s).sum();
        }
        mdp.transition.push_back(std::move(p));
    }
    mdp.initial_distribution = Vector::Constant(num_states, 1.0 / num_states);
    mdp.goal_distribution = Vector::Constant(num_states, 1.0 / num_states);
    return mdp;
}

TabularMDP chain_mdp(int num_states, double gamma) {
    TabularMDP mdp;
    mdp.num_states = num_states;
    mdp.num_actions = 2;
    mdp.gamma = gamma;
    Matrix advance = Matrix::Zero(num_states, num_states);
    for (int s = 0; s < num_states; ++s) advance(s, std::min(s + 1, num_states - 1)) = 1.0;
    mdp.transition = {advance, Matrix::Identity(num_states, num_states)};
    mdp.initial_distribution = Vector::Zero(num_states);
    mdp.initial_distribution(0) = 1.0;
    mdp.goal_distribution = Vector::Constant(num_states, 1.0 / num_states);
    return mdp;
}

TabularEnv::TabularEnv(TabularMDP mdp, int horizon) : mdp_(std::move(mdp)) {
    mdp_.validate();
    if (horizon <= 0) throw ConfigError("TabularEnv: horizon must be positive");
    spec_.observation_dim = 1;
    spec_.goal_dim = 1;
    spec_.action = ActionSpace{ActionKind::discrete, mdp_.num_actions, 0.0};
    spec_.success_radius = 0.0;
    spec_.max_episode_steps = horizon;
    obs_ = Vector::Zero(1);
    goal_ = Vector::Zero(1);
}

Vector TabularEnv::reset(const Vector& goal, Rng& rng) {
    if (goal.size() != 1) throw ShapeError("TabularEnv::reset: goal must be a state index");
    const long g = std::lround(goal(0));
    if (g < 0 || g >= mdp_.num_states) throw std::invalid_argument("TabularEnv::reset: goal outside state space");
    goal_ = goal;
    state_ = static_cast<int>(sample_categorical(
        std::span<const double>(mdp_.initial_distribution.data(), mdp_.num_states), rng));
    steps_ = 0;
    obs_(0) = state_;
    return obs_;
}

StepResult TabularEnv::step(const Vector& action, Rng& rng) {
    if (done()) throw std::logic_error("TabularEnv::step: episode is done");
    if (action.size() != 1) throw ShapeError("TabularEnv::step: action must be an index");
    const long a = std::lround(action(0));
    if (a < 0 || a >= mdp_.num_actions) throw std::invalid_argument("TabularEnv::step: invalid action");
    const Eigen::RowVectorXd row = mdp_.transition[a].row(state_);
    state_ = static_cast<int>(sample_categorical(std::span<const double>(row.data(), row.size()), rng));
    ++steps_;
    obs_(0) = state_;
    return {obs_, done()};
}

Vector TabularEnv::sample_goal(Rng& rng) const {
    Vector g(1);
    g(0) = static_cast<double>(sample_categorical(
        std::span<const double>(mdp_.goal_distribution.data(), mdp_.num_states), rng));
    return g;
}

}  // namespace crl

namespace crl {

TabularPolicy TabularPolicy::uniform(int num_states, int num_actions) {
    return goal_independent(Matrix::Constant(num_states, num_actions, 1.0 / num_actions), num_states);
}

TabularPolicy TabularPolicy::goal_independent(const Matrix& state_policy, int num_goals) {
    TabularPolicy p;
    p.probs.assign(static_cast<std::size_t>(num_goals), state_policy);
    return p;
}

TabularPolicy TabularPolicy::random(Rng& rng, int num_states, int num_actions) {
    TabularPolicy p;
    for (int g = 0; g < num_states; ++g) {
        Matrix m(num_states, num_actions);
        for (int s = 0; s < num_states; ++s) {
            for (int a = 0; a < num_actions; ++a) m(s, a) = -std::log(rng.uniform_open_low());
            m.row(s) /= m.row(s).sum();
        }
        p.probs.push_back(std::move(m));
    }
    return p;
}

TabularPolicy TabularPolicy::greedy(const std::vector<Matrix>& scores) {
    TabularPolicy p;
    for (const auto& q : scores) {
        Matrix m = Matrix::Zero(q.rows(), q.cols());
        for (Eigen::Index s = 0; s < q.rows(); ++s) {
            Eigen::Index best = 0;
            for (Eigen::Index a = 1; a < q.cols(); ++a)
                if (q(s, a) > q(s, best)) best = a;
            m(s, best) = 1.0;
        }
        p.probs.push_back(std::move(m));
    }
    return p;
}

TabularPolicy TabularPolicy::averaged(const Vector& goal_weights) const {
    if (goal_weights.size() != num_goals()) throw ShapeError("TabularPolicy::averaged: weight length mismatch");
    Matrix avg = Matrix::Zero(num_states(), num_actions());
    for (int g = 0; g < num_goals(); ++g) avg += goal_weights(g) * probs[g];
    for (Eigen::Index s = 0; s < avg.rows(); ++s) avg.row(s) /= avg.row(s).sum();
    return goal_independent(avg, num_goals());
}

Matrix TabularPolicy::state_transition(const TabularMDP& mdp, int goal) const {
    Matrix out = Matrix::Zero(mdp.num_states, mdp.num_states);
    for (int a = 0; a < mdp.num_actions; ++a) out += probs[goal].col(a).asDiagonal() * mdp.transition[a];
    return out;
}

void TabularPolicy::validate(const TabularMDP& mdp) const {
    if (num_goals() != mdp.num_states || num_states() != mdp.num_states || num_actions() != mdp.num_actions)
        throw ConfigError("TabularPolicy: shape does not match the MDP");
    for (const auto& m : probs) {
        if ((m.array() < 0.0).any()) throw ConfigError("TabularPolicy: negative probability");
        for (Eigen::Index s = 0; s < m.rows(); ++s)
            if (std::abs(m.row(s).sum() - 1.0) > 1e-12) throw ConfigError("TabularPolicy: row does not sum to 1");
    }
}

}  // namespace crl
