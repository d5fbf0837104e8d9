#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crl/envs/env_spec.hpp"
#include "crl/envs/tabular_mdp.hpp"

namespace crl {

struct Cell {
    int row = 0;
    int col = 0;
    friend bool operator==(const Cell&, const Cell&) = default;
};

/// Occupancy grid parsed from text: '#' wall, '.' free, 'S' free start cell.
/// Blank lines and lines starting with ';' are ignored. Anything outside the
/// grid counts as wall.
class MazeLayout {
public:
    static MazeLayout parse(std::string_view text);
    static MazeLayout load(const std::string& path);
    /// One of "empty5", "spiral11", "nine_room".
    static MazeLayout builtin(std::string_view name);
    static std::vector<std::string> builtin_names();

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool is_wall(int row, int col) const;
    bool is_free(const Cell& c) const { return !is_wall(c.row, c.col); }
    const std::vector<Cell>& free_cells() const { return free_; }
    const std::vector<Cell>& start_cells() const { return starts_; }
    std::string to_text() const;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<char> grid_;
    std::vector<Cell> free_;
    std::vector<Cell> starts_;
};

/// Breadth-first hop count on the 4-connected free grid; nullopt when the
/// cells are disconnected. Throws std::invalid_argument if either cell is a wall.
std::optional<int> shortest_path_distance(const MazeLayout& maze, Cell from, Cell to);

/// Discretized surrogate of a maze: states are free cells in free_cells()
/// order, actions are {stay, up, down, left, right}. A move succeeds with
/// probability 1 - slip, otherwise the agent stays; moves into walls stay.
/// p0 is uniform over start cells and p_g uniform over free cells.
TabularMDP grid_surrogate(const MazeLayout& maze, double gamma, double slip = 0.0);

struct PointMazeConfig {
    double cell_size = 1.0;
    /// Per-axis displacement bound; also the action-space bound. Must not
    /// exceed cell_size so a single step cannot jump over a wall cell.
    double max_step = 1.0;
    int max_episode_steps = 50;
    double success_radius = 0.5;
    /// Start positions are jittered uniformly within +-start_noise/2 cells
    /// around the start cell center.
    double start_noise = 0.0;
};

/// Continuous 2D point agent in a grid maze. Observation = goal = (x, y) in
/// meters, x along columns and y along rows. Moves are resolved one axis at a
/// time (x then y); a move whose target lies in a wall is dropped on that axis.
class PointMaze final : public GoalEnv {
public:
    PointMaze(MazeLayout layout, PointMazeConfig config);

    const EnvSpec& spec() const override { return spec_; }
    Vector reset(const Vector& goal, Rng& rng) override;
    StepResult step(const Vector& action, Rng& rng) override;
    /// Center of a uniformly drawn free cell.
    Vector sample_goal(Rng& rng) const override;
    std::unique_ptr<GoalEnv> clone() const override { return std::make_unique<PointMaze>(*this); }

    const Vector& observation() const override { return pos_; }
    const Vector& commanded_goal() const override { return goal_; }
    int steps_taken() const override { return steps_; }

    const MazeLayout& layout() const { return layout_; }
    const PointMazeConfig& config() const { return config_; }

    Cell cell_of(const Vector& position) const;
    Vector cell_center(const Cell& c) const;
    bool in_free_space(const Vector& position) const;

    /// Restores mid-episode state (used when resuming a checkpointed run).
    void restore(const Vector& position, const Vector& goal, int steps);

private:
    MazeLayout layout_;
    PointMazeConfig config_;
    EnvSpec spec_;
    Vector pos_;
    Vector goal_;
    int steps_ = 0;
};

}  // namespace crl
