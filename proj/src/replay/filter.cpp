#include "crl/replay/filter.hpp"

#include <algorithm>
#include <cmath>

namespace crl {

void FilterConfig::validate() const {
    if (!(epsilon > 0.0)) throw ConfigError("filter epsilon must be positive");
}

double filter_log_ratio(const GoalPolicy& policy, const Matrix& segment_states, const Matrix& segment_actions,
                        const Vector& commanded_goal, const Vector& reached_goal) {
    if (segment_states.rows() != segment_actions.rows() || segment_states.rows() < 1)
        throw ShapeError("filter_log_ratio: segment needs matching, non-empty states and actions");
    const Eigen::Index n = segment_states.rows();
    const Matrix commanded = commanded_goal.transpose().replicate(n, 1);
    const Matrix reached = reached_goal.transpose().replicate(n, 1);
    const double num = policy.log_prob(segment_states, commanded, segment_actions).sum();
    const double den = policy.log_prob(segment_states, reached, segment_actions).sum();
    if (!std::isfinite(den)) return std::numeric_limits<double>::quiet_NaN();
    return num - den;
}

bool filter_predicate(const GoalPolicy& policy, const Matrix& segment_states, const Matrix& segment_actions,
                      const Vector& commanded_goal, const Vector& reached_goal, double epsilon,
                      FilterStats* stats) {
    if (!(epsilon > 0.0)) throw ConfigError("filter_predicate: epsilon must be positive");
    if (stats) ++stats->considered;
    bool keep = true;
    if (epsilon != std::numeric_limits<double>::infinity()) {
        const double log_r = filter_log_ratio(policy, segment_states, segment_actions, commanded_goal, reached_goal);
        if (std::isnan(log_r)) {
            if (stats) ++stats->zero_denominator;
            keep = false;
        } else {
            keep = std::abs(std::exp(log_r) - 1.0) <= epsilon;
        }
    }
    if (stats) ++(keep ? stats->kept : stats->rejected);
    return keep;
}

NceBatch filter_nce_batch(const NceBatch& batch, const TrajectoryBuffer& buffer, const GoalPolicy& policy,
                          const FilterConfig& config, FilterStats* stats) {
    config.validate();
    if (!config.active()) {
        if (stats) {
            stats->considered += batch.size();
            stats->kept += batch.size();
        }
        return batch;
    }
    std::vector<Eigen::Index> keep_rows;
    buffer.read([&](const BufferView& view) {
        const auto& trajs = view.trajectories();
        for (Eigen::Index i = 0; i < batch.size(); ++i) {
            const auto id = batch.traj_ids[static_cast<std::size_t>(i)];
            // trajectories are ordered by id
            auto it = std::lower_bound(trajs.begin(), trajs.end(), id,
                                       [](const StoredTrajectory& s, std::uint64_t v) { return s.id < v; });
            if (it == trajs.end() || it->id != id)
                throw std::invalid_argument("filter_nce_batch: batch trajectory no longer stored");
            const Eigen::Index t = batch.t[static_cast<std::size_t>(i)];
            const Eigen::Index d = batch.offsets[static_cast<std::size_t>(i)];
            const Matrix seg_states = it->data.states.middleRows(t, d);
            const Matrix seg_actions = it->data.actions.middleRows(t, d);
            const Vector reached = batch.futures.row(i).transpose();
            if (filter_predicate(policy, seg_states, seg_actions, it->data.commanded_goal, reached, config.epsilon,
                                 stats))
                keep_rows.push_back(i);
        }
        return 0;
    });
    return batch.select(keep_rows);
}

}  // namespace crl
