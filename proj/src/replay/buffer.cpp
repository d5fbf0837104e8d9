#include "crl/replay/buffer.hpp"

#include <algorithm>
#include <string>

namespace crl {

void Trajectory::validate() const {
    if (states.rows() < 2) throw std::invalid_argument("trajectory needs at least 2 states");
    if (actions.rows() != states.rows() - 1)
        throw std::invalid_argument("trajectory has " + std::to_string(actions.rows()) + " actions for " +
                                    std::to_string(states.rows()) + " states");
    if (!states.allFinite() || !actions.allFinite() || !commanded_goal.allFinite())
        throw std::invalid_argument("trajectory contains non-finite entries");
}

namespace {

TransitionRef locate(const std::vector<std::int64_t>& prefix, std::int64_t flat) {
    if (prefix.empty() || flat < 0 || flat >= prefix.back()) throw std::out_of_range("buffer index out of range");
    const auto it = std::upper_bound(prefix.begin(), prefix.end(), flat);
    const auto slot = static_cast<std::size_t>(it - prefix.begin());
    const std::int64_t before = slot == 0 ? 0 : prefix[slot - 1];
    return {slot, static_cast<Eigen::Index>(flat - before)};
}

}  // namespace

TransitionRef BufferView::locate_transition(std::int64_t flat) const { return locate(transition_prefix_, flat); }

TransitionRef BufferView::locate_state(std::int64_t flat) const { return locate(state_prefix_, flat); }

TrajectoryBuffer::TrajectoryBuffer(int observation_dim, int stored_action_dim, int goal_dim,
                                   std::int64_t capacity_transitions)
    : observation_dim_(observation_dim),
      stored_action_dim_(stored_action_dim),
      goal_dim_(goal_dim),
      capacity_(capacity_transitions) {
    if (capacity_transitions < 1) throw ConfigError("TrajectoryBuffer: capacity must be positive");
    if (goal_dim < 1 || goal_dim > observation_dim) throw ConfigError("TrajectoryBuffer: invalid goal_dim");
}

void TrajectoryBuffer::insert(Trajectory trajectory) {
    trajectory.validate();
    require_cols(trajectory.states, observation_dim_, "TrajectoryBuffer::insert states");
    require_cols(trajectory.actions, stored_action_dim_, "TrajectoryBuffer::insert actions");
    if (trajectory.num_transitions() > capacity_)
        throw std::invalid_argument("TrajectoryBuffer::insert: trajectory exceeds buffer capacity");

    std::lock_guard<std::mutex> lock(mutex_);
    std::int64_t total = transition_prefix_.empty() ? 0 : transition_prefix_.back();
    total += trajectory.num_transitions();
    while (total > capacity_) {
        total -= trajectories_.front().data.num_transitions();
        trajectories_.pop_front();
    }
    trajectories_.push_back({next_id_++, std::move(trajectory)});
    rebuild_prefix();
}

void TrajectoryBuffer::rebuild_prefix() {
    transition_prefix_.resize(trajectories_.size());
    state_prefix_.resize(trajectories_.size());
    std::int64_t tr = 0;
    std::int64_t st = 0;
    for (std::size_t i = 0; i < trajectories_.size(); ++i) {
        tr += trajectories_[i].data.num_transitions();
        st += trajectories_[i].data.length();
        transition_prefix_[i] = tr;
        state_prefix_[i] = st;
    }
}

std::int64_t TrajectoryBuffer::num_transitions() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return transition_prefix_.empty() ? 0 : transition_prefix_.back();
}

std::size_t TrajectoryBuffer::num_trajectories() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return trajectories_.size();
}

std::uint64_t TrajectoryBuffer::next_id() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return next_id_;
}

void TrajectoryBuffer::restore(std::vector<StoredTrajectory> trajectories, std::uint64_t next_id) {
    std::int64_t total = 0;
    for (const auto& t : trajectories) {
        t.data.validate();
        require_cols(t.data.states, observation_dim_, "TrajectoryBuffer::restore states");
        require_cols(t.data.actions, stored_action_dim_, "TrajectoryBuffer::restore actions");
        total += t.data.num_transitions();
    }
    if (total > capacity_) throw std::invalid_argument("TrajectoryBuffer::restore: contents exceed capacity");
    std::lock_guard<std::mutex> lock(mutex_);
    trajectories_.assign(std::make_move_iterator(trajectories.begin()), std::make_move_iterator(trajectories.end()));
    next_id_ = next_id;
    rebuild_prefix();
}

std::vector<StoredTrajectory> TrajectoryBuffer::snapshot() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return {trajectories_.begin(), trajectories_.end()};
}

void TrajectoryQueue::push(Trajectory trajectory) {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        if (closed_) throw std::logic_error("TrajectoryQueue::push after close");
        items_.push_back(std::move(trajectory));
    }
    ready_.notify_one();
}

std::optional<Trajectory> TrajectoryQueue::pop() {
    std::unique_lock<std::mutex> lock(mutex_);
    ready_.wait(lock, [this] { return closed_ || !items_.empty(); });
    if (items_.empty()) return std::nullopt;
    Trajectory t = std::move(items_.front());
    items_.pop_front();
    return t;
}

std::optional<Trajectory> TrajectoryQueue::try_pop() {
    std::lock_guard<std::mutex> lock(mutex_);
    if (items_.empty()) return std::nullopt;
    Trajectory t = std::move(items_.front());
    items_.pop_front();
    return t;
}

void TrajectoryQueue::close() {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        closed_ = true;
    }
    ready_.notify_all();
}

}  // namespace crl
