#pragma once

#include <cstdint>
#include <limits>

#include "crl/actor/goal_policy.hpp"
#include "crl/replay/buffer.hpp"
#include "crl/replay/samplers.hpp"

namespace crl {

struct FilterConfig {
    bool enabled = false;
    double epsilon = std::numeric_limits<double>::infinity();

    void validate() const;
    /// True when filtering can change a batch (enabled with a finite epsilon).
    bool active() const { return enabled && epsilon != std::numeric_limits<double>::infinity(); }
};

struct FilterStats {
    std::int64_t considered = 0;
    std::int64_t kept = 0;
    std::int64_t rejected = 0;
    std::int64_t zero_denominator = 0;
};

/// log prod_i pi(a_i | s_i, commanded) - log prod_i pi(a_i | s_i, reached)
/// over a segment. Returns NaN when the denominator likelihood is zero.
double filter_log_ratio(const GoalPolicy& policy, const Matrix& segment_states, const Matrix& segment_actions,
                        const Vector& commanded_goal, const Vector& reached_goal);

/// Keep iff |R - 1| <= epsilon for the policy likelihood ratio R. An infinite
/// epsilon keeps everything without evaluating the policy. Zero-likelihood
/// denominators are excluded and counted.
bool filter_predicate(const GoalPolicy& policy, const Matrix& segment_states, const Matrix& segment_actions,
                      const Vector& commanded_goal, const Vector& reached_goal, double epsilon,
                      FilterStats* stats = nullptr);

/// Drops the rows of `batch` whose segment s_t..s_{t+delta-1} fails the
/// predicate under the current policy. Inactive configs return the batch
/// unchanged.
NceBatch filter_nce_batch(const NceBatch& batch, const TrajectoryBuffer& buffer, const GoalPolicy& policy,
                          const FilterConfig& config, FilterStats* stats = nullptr);

}  // namespace crl
