#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <vector>

#include "crl/numcore/types.hpp"

namespace crl {

/// One episode. `states` has T rows; `actions` has T - 1 rows, action i
/// being the one taken in state i.
struct Trajectory {
    Matrix states;
    Matrix actions;
    Vector commanded_goal;

    Eigen::Index length() const { return states.rows(); }
    Eigen::Index num_transitions() const { return states.rows() - 1; }

    /// Throws std::invalid_argument on fewer than two states, mismatched
    /// action count or non-finite entries.
    void validate() const;
};

/// A stored trajectory together with its insertion serial number.
struct StoredTrajectory {
    std::uint64_t id = 0;
    Trajectory data;
};

/// Position of a transition inside a buffer snapshot.
struct TransitionRef {
    std::size_t slot = 0;  // index into the snapshot's trajectory list
    Eigen::Index t = 0;
};

/// Read-only view of the buffer handed out while the buffer lock is held.
class BufferView {
public:
    BufferView(const std::deque<StoredTrajectory>& trajectories, const std::vector<std::int64_t>& transition_prefix,
               const std::vector<std::int64_t>& state_prefix, int goal_dim)
        : trajectories_(trajectories),
          transition_prefix_(transition_prefix),
          state_prefix_(state_prefix),
          goal_dim_(goal_dim) {}

    const std::deque<StoredTrajectory>& trajectories() const { return trajectories_; }
    const StoredTrajectory& at(std::size_t slot) const { return trajectories_[slot]; }
    std::int64_t num_transitions() const { return transition_prefix_.empty() ? 0 : transition_prefix_.back(); }
    std::int64_t num_states() const { return state_prefix_.empty() ? 0 : state_prefix_.back(); }
    int goal_dim() const { return goal_dim_; }

    /// Maps a flat index in [0, num_transitions) to (trajectory, t).
    TransitionRef locate_transition(std::int64_t flat) const;
    /// Maps a flat index in [0, num_states) to (trajectory, t).
    TransitionRef locate_state(std::int64_t flat) const;

private:
    const std::deque<StoredTrajectory>& trajectories_;
    const std::vector<std::int64_t>& transition_prefix_;
    const std::vector<std::int64_t>& state_prefix_;
    int goal_dim_;
};

/// FIFO store of whole trajectories bounded by a transition count. All access
/// goes through one mutex: inserts and sampling never interleave.
class TrajectoryBuffer {
public:
    TrajectoryBuffer(int observation_dim, int stored_action_dim, int goal_dim,
                     std::int64_t capacity_transitions = 1'000'000);

    /// Stores the trajectory, evicting the oldest ones until the total fits.
    /// A trajectory larger than the capacity is rejected.
    void insert(Trajectory trajectory);

    std::int64_t num_transitions() const;
    std::size_t num_trajectories() const;
    std::int64_t capacity() const { return capacity_; }
    int observation_dim() const { return observation_dim_; }
    int stored_action_dim() const { return stored_action_dim_; }
    int goal_dim() const { return goal_dim_; }
    std::uint64_t next_id() const;

    /// Runs `fn(const BufferView&)` with the lock held.
    template <class Fn>
    decltype(auto) read(Fn&& fn) const {
        std::lock_guard<std::mutex> lock(mutex_);
        BufferView view(trajectories_, transition_prefix_, state_prefix_, goal_dim_);
        return fn(view);
    }

    /// Replaces the contents (used when restoring checkpoints).
    void restore(std::vector<StoredTrajectory> trajectories, std::uint64_t next_id);
    std::vector<StoredTrajectory> snapshot() const;

private:
    void rebuild_prefix();

    int observation_dim_;
    int stored_action_dim_;
    int goal_dim_;
    std::int64_t capacity_;
    std::uint64_t next_id_ = 0;
    std::deque<StoredTrajectory> trajectories_;
    std::vector<std::int64_t> transition_prefix_;
    std::vector<std::int64_t> state_prefix_;
    mutable std::mutex mutex_;
};

/// Hand-off queue between rollout workers and the trainer.
class TrajectoryQueue {
public:
    void push(Trajectory trajectory);
    /// Blocks until an item is available or the queue is closed and drained.
    std::optional<Trajectory> pop();
    std::optional<Trajectory> try_pop();
    void close();

private:
    std::deque<Trajectory> items_;
    bool closed_ = false;
    std::mutex mutex_;
    std::condition_variable ready_;
};

}  // namespace crl
