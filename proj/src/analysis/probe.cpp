#include "crl/analysis/probe.hpp"

#include <cmath>
#include <numeric>
#include <vector>

namespace crl {

Matrix probe_actions(const ActionSpace& action, Eigen::Index rows) {
    return Matrix::Zero(rows, action.stored_dim());
}

ProbeReport ridge_probe(const Matrix& features, const Vector& targets, double ridge, std::uint64_t seed,
                        double train_fraction, std::string feature_source) {
    if (!(ridge > 0.0)) throw ConfigError("ridge_probe: ridge coefficient must be positive");
    if (features.rows() != targets.size()) throw ShapeError("ridge_probe: feature/target row mismatch");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("ridge_probe: train fraction in (0, 1)");
    const auto n = features.rows();
    const auto n_train = static_cast<Eigen::Index>(std::llround(train_fraction * static_cast<double>(n)));
    if (n_train < 1 || n_train >= n) throw ConfigError("ridge_probe: need non-empty train and test splits");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    for (std::size_t i = order.size() - 1; i > 0; --i)
        std::swap(order[i], order[static_cast<std::size_t>(rng.uniform_int(i + 1))]);

    const auto d = features.cols();
    Matrix x_train(n_train, d);
    Vector y_train(n_train);
    Matrix x_test(n - n_train, d);
    Vector y_test(n - n_train);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto src = order[static_cast<std::size_t>(i)];
        if (i < n_train) {
            x_train.row(i) = features.row(src);
            y_train(i) = targets(src);
        } else {
            x_test.row(i - n_train) = features.row(src);
            y_test(i - n_train) = targets(src);
        }
    }

    const RowVector mu = x_train.colwise().mean();
    const double y_mean = y_train.mean();
    const Matrix xc = x_train.rowwise() - mu;
    const Vector yc = y_train.array() - y_mean;
    const Matrix gram = xc.transpose() * xc + ridge * Matrix::Identity(d, d);

    ProbeReport rep;
    rep.weights = gram.ldlt().solve(xc.transpose() * yc);
    rep.intercept = y_mean - mu.dot(rep.weights);
    rep.ridge_coefficient = ridge;
    rep.num_samples = static_cast<int>(n);
    rep.num_train = static_cast<int>(n_train);
    rep.num_test = static_cast<int>(n - n_train);
    rep.feature_source = std::move(feature_source);
    rep.train_mse = ((x_train * rep.weights).array() + rep.intercept - y_train.array()).square().mean();
    rep.test_mse = ((x_test * rep.weights).array() + rep.intercept - y_test.array()).square().mean();
    return rep;
}

ProbeReport linear_probe(const ContrastiveCritic& critic, const PointMaze& maze, Cell goal, double ridge,
                         std::uint64_t seed, std::string feature_source) {
    const auto& cells = maze.layout().free_cells();
    std::vector<Vector> positions;
    std::vector<double> dists;
    for (const auto& c : cells) {
        const auto dist = shortest_path_distance(maze.layout(), c, goal);
        if (!dist) continue;
        positions.push_back(maze.cell_center(c));
        dists.push_back(static_cast<double>(*dist));
    }
    const auto n = static_cast<Eigen::Index>(positions.size());
    Matrix states(n, critic.obs_dim());
    for (Eigen::Index i = 0; i < n; ++i) states.row(i) = positions[static_cast<std::size_t>(i)].transpose();
    const Matrix feats = critic.sa_repr(states, probe_actions(critic.action_space(), n));
    return ridge_probe(feats, Eigen::Map<const Vector>(dists.data(), n), ridge, seed, 0.8, std::move(feature_source));
}

}  // namespace crl
