#include "crl/harness/expert.hpp"

#include <algorithm>
#include <queue>

namespace crl {

namespace {

std::vector<int> distances_to(const MazeLayout& maze, Cell goal) {
    std::vector<int> dist(static_cast<std::size_t>(maze.rows() * maze.cols()), -1);
    auto idx = [&](Cell c) { return static_cast<std::size_t>(c.row * maze.cols() + c.col); };
    std::queue<Cell> q;
    dist[idx(goal)] = 0;
    q.push(goal);
    const int dr[4] = {-1, 1, 0, 0};
    const int dc[4] = {0, 0, -1, 1};
    while (!q.empty()) {
        const Cell c = q.front();
        q.pop();
        for (int k = 0; k < 4; ++k) {
            const Cell n{c.row + dr[k], c.col + dc[k]};
            if (maze.is_wall(n.row, n.col) || dist[idx(n)] >= 0) continue;
            dist[idx(n)] = dist[idx(c)] + 1;
            q.push(n);
        }
    }
    return dist;
}

}  // namespace

MazeExpert::MazeExpert(const PointMaze& maze, ExpertConfig config) : maze_(&maze), config_(config) {
    if (config.noise_std < 0.0 || config.random_prob < 0.0 || config.random_prob > 1.0)
        throw ConfigError("MazeExpert: invalid noise settings");
}

Vector MazeExpert::act(const Vector& position, const Vector& goal) const {
    const MazeLayout& layout = maze_->layout();
    const Cell here = maze_->cell_of(position);
    const Cell target_cell = maze_->cell_of(goal);
    Vector target = goal;
    if (!(here == target_cell)) {
        const auto dist = distances_to(layout, target_cell);
        auto d = [&](Cell c) { return dist[static_cast<std::size_t>(c.row * layout.cols() + c.col)]; };
        const int dr[4] = {-1, 1, 0, 0};
        const int dc[4] = {0, 0, -1, 1};
        if (d(here) > 0) {
            for (int k = 0; k < 4; ++k) {
                const Cell n{here.row + dr[k], here.col + dc[k]};
                if (!layout.is_wall(n.row, n.col) && d(n) == d(here) - 1) {
                    target = maze_->cell_center(n);
                    break;
                }
            }
        }
    }
    const double bound = maze_->config().max_step;
    return (target - position).cwiseMax(-bound).cwiseMin(bound);
}

Vector MazeExpert::act(const Vector& position, const Vector& goal, Rng& rng) const {
    const double bound = maze_->config().max_step;
    if (config_.random_prob > 0.0 && rng.bernoulli(config_.random_prob)) {
        Vector a(2);
        a << rng.uniform(-bound, bound), rng.uniform(-bound, bound);
        return a;
    }
    Vector a = act(position, goal);
    if (config_.noise_std > 0.0) {
        for (Eigen::Index i = 0; i < a.size(); ++i) a(i) += config_.noise_std * rng.normal();
        a = a.cwiseMax(-bound).cwiseMin(bound);
    }
    return a;
}

Dataset collect_expert_dataset(const PointMaze& maze, int episodes, const ExpertConfig& config, Rng& rng,
                               const std::string& env_name) {
    if (episodes < 1) throw ConfigError("collect_expert_dataset: need at least one episode");
    PointMaze env = maze;
    const MazeExpert expert(env, config);
    Dataset d;
    d.observation_dim = env.spec().observation_dim;
    d.goal_dim = env.spec().goal_dim;
    d.stored_action_dim = env.spec().action.stored_dim();
    for (int e = 0; e < episodes; ++e) {
        const Vector goal = env.sample_goal(rng);
        Vector obs = env.reset(goal, rng);
        const int horizon = env.spec().max_episode_steps;
        Trajectory t;
        t.states.resize(horizon + 1, d.observation_dim);
        t.actions.resize(horizon, d.stored_action_dim);
        t.commanded_goal = goal;
        t.states.row(0) = obs.transpose();
        for (int k = 0; k < horizon; ++k) {
            const Vector a = expert.act(obs, goal, rng);
            obs = env.step(a, rng).observation;
            t.actions.row(k) = a.transpose();
            t.states.row(k + 1) = obs.transpose();
        }
        d.trajectories.push_back(std::move(t));
    }
    d.sidecar = {{"env", env_name.empty() ? "maze" : env_name},
                 {"layout", maze.layout().to_text()},
                 {"cell_size", maze.config().cell_size},
                 {"max_step", maze.config().max_step},
                 {"horizon", maze.config().max_episode_steps},
                 {"success_radius", maze.config().success_radius},
                 {"start_noise", maze.config().start_noise},
                 {"expert_noise_std", config.noise_std},
                 {"expert_random_prob", config.random_prob}};
    return d;
}

}  // namespace crl
