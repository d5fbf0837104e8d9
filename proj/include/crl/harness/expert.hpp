#pragma once

#include "crl/envs/point_maze.hpp"
#include "crl/replay/dataset_io.hpp"

namespace crl {

struct ExpertConfig {
    /// Gaussian noise added to each action coordinate (before clipping).
    double noise_std = 0.0;
    /// Probability of replacing the action with a uniform random one.
    double random_prob = 0.0;
};

/// Scripted controller for point mazes: heads for the center of the next
/// cell on a BFS shortest path to the goal cell, then for the goal itself.
class MazeExpert {
public:
    MazeExpert(const PointMaze& maze, ExpertConfig config = {});

    /// Noise-free action toward the goal.
    Vector act(const Vector& position, const Vector& goal) const;
    /// Action with the configured noise.
    Vector act(const Vector& position, const Vector& goal, Rng& rng) const;

private:
    const PointMaze* maze_;
    ExpertConfig config_;
};

/// Rolls out the expert for `episodes` episodes with goals from the
/// environment's goal distribution. The sidecar records the maze and config.
Dataset collect_expert_dataset(const PointMaze& maze, int episodes, const ExpertConfig& config, Rng& rng,
                               const std::string& env_name = "");

}  // namespace crl
