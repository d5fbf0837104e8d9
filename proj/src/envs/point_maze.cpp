#include "crl/envs/point_maze.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace crl {

namespace {

constexpr std::string_view kEmpty5 =
    "S....\n"
    ".....\n"
    ".....\n"
    ".....\n"
    ".....\n";

constexpr std::string_view kSpiral11 =
    "S..........\n"
    "##########.\n"
    ".........#.\n"
    ".#######.#.\n"
    ".#.....#.#.\n"
    ".#.###.#.#.\n"
    ".#.#...#.#.\n"
    ".#.#####.#.\n"
    ".#.......#.\n"
    ".#########.\n"
    "...........\n";

constexpr std::string_view kNineRoom =
    "...#...#...\n"
    ".S...S...S.\n"
    "...#...#...\n"
    "#.###.###.#\n"
    "...#...#...\n"
    ".S...S...S.\n"
    "...#...#...\n"
    "#.###.###.#\n"
    "...#...#...\n"
    ".S...S...S.\n"
    "...#...#...\n";

}  // namespace

MazeLayout MazeLayout::parse(std::string_view text) {
    MazeLayout m;
    std::vector<std::string> lines;
    std::istringstream in{std::string(text)};
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == ';') continue;
        lines.push_back(line);
    }
    if (lines.empty()) throw ConfigError("MazeLayout: empty layout");
    m.rows_ = static_cast<int>(lines.size());
    m.cols_ = static_cast<int>(lines.front().size());
    for (const auto& l : lines) {
        if (static_cast<int>(l.size()) != m.cols_) throw ConfigError("MazeLayout: ragged rows");
        for (char ch : l) {
            if (ch != '#' && ch != '.' && ch != 'S') throw ConfigError(std::string("MazeLayout: bad character '") + ch + "'");
            m.grid_.push_back(ch);
        }
    }
    for (int r = 0; r < m.rows_; ++r) {
        for (int c = 0; c < m.cols_; ++c) {
            const char ch = m.grid_[r * m.cols_ + c];
            if (ch != '#') m.free_.push_back({r, c});
            if (ch == 'S') m.starts_.push_back({r, c});
        }
    }
    if (m.starts_.empty()) throw ConfigError("MazeLayout: no start cell ('S')");
    return m;
}

MazeLayout MazeLayout::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("MazeLayout: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

MazeLayout MazeLayout::builtin(std::string_view name) {
    if (name == "empty5") return parse(kEmpty5);
    if (name == "spiral11") return parse(kSpiral11);
    if (name == "nine_room") return parse(kNineRoom);
    throw ConfigError("unknown maze '" + std::string(name) + "'");
}

std::vector<std::string> MazeLayout::builtin_names() { return {"empty5", "spiral11", "nine_room"}; }

TabularMDP grid_surrogate(const MazeLayout& maze, double gamma, double slip) {
    if (!(slip >= 0.0 && slip <= 1.0)) throw ConfigError("grid_surrogate: slip must be in [0, 1]");
    const auto& cells = maze.free_cells();
    const int n = static_cast<int>(cells.size());
    if (n == 0) throw ConfigError("grid_surrogate: maze has no free cells");
    std::vector<int> index(static_cast<std::size_t>(maze.rows() * maze.cols()), -1);
    for (int i = 0; i < n; ++i) index[static_cast<std::size_t>(cells[i].row * maze.cols() + cells[i].col)] = i;

    constexpr int dr[5] = {0, -1, 1, 0, 0};
    constexpr int dc[5] = {0, 0, 0, -1, 1};
    TabularMDP mdp;
    mdp.num_states = n;
    mdp.num_actions = 5;
    mdp.gamma = gamma;
    mdp.transition.assign(5, Matrix::Zero(n, n));
    for (int a = 0; a < 5; ++a) {
        for (int s = 0; s < n; ++s) {
            const Cell to{cells[s].row + dr[a], cells[s].col + dc[a]};
            const int t = maze.is_free(to) ? index[static_cast<std::size_t>(to.row * maze.cols() + to.col)] : s;
            mdp.transition[a](s, t) += 1.0 - slip;
            mdp.transition[a](s, s) += slip;
        }
    }
    mdp.goal_distribution = Vector::Constant(n, 1.0 / n);
    mdp.initial_distribution = Vector::Zero(n);
    for (const Cell& c : maze.start_cells())
        mdp.initial_distribution[index[static_cast<std::size_t>(c.row * maze.cols() + c.col)]] += 1.0;
    mdp.initial_distribution /= mdp.initial_distribution.sum();
    mdp.validate();
    return mdp;
}

bool MazeLayout::is_wall(int row, int col) const {
    if (row < 0 || col < 0 || row >= rows_ || col >= cols_) return true;
    return grid_[row * cols_ + col] == '#';
}

std::string MazeLayout::to_text() const {
    std::string out;
    for (int r = 0; r < rows_; ++r) {
        out.append(grid_.begin() + r * cols_, grid_.begin() + (r + 1) * cols_);
        out.push_back('\n');
    }
    return out;
}

std::optional<int> shortest_path_distance(const MazeLayout& maze, Cell from, Cell to) {
    if (!maze.is_free(from) || !maze.is_free(to))
        throw std::invalid_argument("shortest_path_distance: cell is not in free space");
    std::vector<int> dist(static_cast<std::size_t>(maze.rows() * maze.cols()), -1);
    auto idx = [&](const Cell& c) { return static_cast<std::size_t>(c.row * maze.cols() + c.col); };
    std::deque<Cell> queue{from};
    dist[idx(from)] = 0;
    constexpr int dr[4] = {-1, 1, 0, 0};
    constexpr int dc[4] = {0, 0, -1, 1};
    while (!queue.empty()) {
        const Cell c = queue.front();
        queue.pop_front();
        if (c == to) return dist[idx(c)];
        for (int k = 0; k < 4; ++k) {
            const Cell n{c.row + dr[k], c.col + dc[k]};
            if (!maze.is_free(n) || dist[idx(n)] >= 0) continue;
            dist[idx(n)] = dist[idx(c)] + 1;
            queue.push_back(n);
        }
    }
    return std::nullopt;
}

PointMaze::PointMaze(MazeLayout layout, PointMazeConfig config) : layout_(std::move(layout)), config_(config) {
    if (!(config_.cell_size > 0.0)) throw ConfigError("PointMaze: cell_size must be positive");
    if (!(config_.max_step > 0.0) || config_.max_step > config_.cell_size)
        throw ConfigError("PointMaze: max_step must be in (0, cell_size]");
    if (config_.max_episode_steps <= 0) throw ConfigError("PointMaze: max_episode_steps must be positive");
    if (config_.success_radius < 0.0) throw ConfigError("PointMaze: success_radius must be non-negative");
    if (config_.start_noise < 0.0 || config_.start_noise >= 1.0) throw ConfigError("PointMaze: start_noise must be in [0, 1)");
    spec_.observation_dim = 2;
    spec_.goal_dim = 2;
    spec_.action = ActionSpace{ActionKind::continuous, 2, config_.max_step};
    spec_.success_radius = config_.success_radius;
    spec_.max_episode_steps = config_.max_episode_steps;
    pos_ = cell_center(layout_.start_cells().front());
    goal_ = pos_;
}

Cell PointMaze::cell_of(const Vector& p) const {
    return {static_cast<int>(std::floor(p(1) / config_.cell_size)),
            static_cast<int>(std::floor(p(0) / config_.cell_size))};
}

Vector PointMaze::cell_center(const Cell& c) const {
    Vector v(2);
    v << (c.col + 0.5) * config_.cell_size, (c.row + 0.5) * config_.cell_size;
    return v;
}

bool PointMaze::in_free_space(const Vector& p) const {
    if (p.size() != 2 || !p.allFinite()) return false;
    const Cell c = cell_of(p);
    return layout_.is_free(c);
}

Vector PointMaze::reset(const Vector& goal, Rng& rng) {
    if (goal.size() != 2) throw ShapeError("PointMaze::reset: goal must be 2-D");
    if (!in_free_space(goal)) throw std::invalid_argument("PointMaze::reset: goal outside free space");
    goal_ = goal;
    const auto& starts = layout_.start_cells();
    const Cell start = starts[rng.uniform_int(starts.size())];
    pos_ = cell_center(start);
    if (config_.start_noise > 0.0) {
        const double half = 0.5 * config_.start_noise * config_.cell_size;
        pos_(0) += rng.uniform(-half, half);
        pos_(1) += rng.uniform(-half, half);
    }
    steps_ = 0;
    return pos_;
}

StepResult PointMaze::step(const Vector& action, Rng& /*rng*/) {
    if (done()) throw std::logic_error("PointMaze::step: episode is done");
    if (action.size() != 2) throw ShapeError("PointMaze::step: action must be 2-D");
    if (!action.allFinite()) throw std::invalid_argument("PointMaze::step: non-finite action");
    for (int axis = 0; axis < 2; ++axis) {
        const double d = std::clamp(action(axis), -config_.max_step, config_.max_step);
        Vector candidate = pos_;
        candidate(axis) += d;
        if (in_free_space(candidate)) pos_ = candidate;
    }
    ++steps_;
    return {pos_, done()};
}

Vector PointMaze::sample_goal(Rng& rng) const {
    const auto& cells = layout_.free_cells();
    return cell_center(cells[rng.uniform_int(cells.size())]);
}

void PointMaze::restore(const Vector& position, const Vector& goal, int steps) {
    if (!in_free_space(position)) throw std::invalid_argument("PointMaze::restore: position outside free space");
    pos_ = position;
    goal_ = goal;
    steps_ = steps;
}

}  // namespace crl
