#pragma once

#include <cstdint>
#include <string>

#include "crl/critic/contrastive_critic.hpp"
#include "crl/envs/point_maze.hpp"

namespace crl {

struct ProbeReport {
    double train_mse = 0.0;
    double test_mse = 0.0;
    double ridge_coefficient = 1e-3;
    int num_samples = 0;
    int num_train = 0;
    int num_test = 0;
    std::string feature_source;
    Vector weights;
    double intercept = 0.0;
};

/// Ridge regression y ~ X w + b with an unpenalized intercept (features and
/// targets are centered on the training split). The split is a seeded
/// permutation with round(train_fraction * n) training rows.
/// Throws ConfigError unless ridge > 0 and both splits are non-empty.
ProbeReport ridge_probe(const Matrix& features, const Vector& targets, double ridge, std::uint64_t seed,
                        double train_fraction = 0.8, std::string feature_source = "features");

/// Probe target: BFS shortest-path distance (in cells) from each free cell to
/// `goal`. Features: phi(cell center, a = 0). Unreachable cells are skipped.
ProbeReport linear_probe(const ContrastiveCritic& critic, const PointMaze& maze, Cell goal, double ridge,
                         std::uint64_t seed, std::string feature_source = "critic");

/// The probe-action row used by the analysis tools: zeros for continuous
/// actions, index 0 for discrete ones.
Matrix probe_actions(const ActionSpace& action, Eigen::Index rows);

}  // namespace crl
