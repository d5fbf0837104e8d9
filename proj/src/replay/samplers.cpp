#include "crl/replay/samplers.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace crl {

GeometricSampler::GeometricSampler(double gamma, int max_rejections)
    : gamma_(gamma), max_rejections_(max_rejections) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("GeometricSampler: gamma must be in [0, 1)");
    if (max_rejections < 0) throw ConfigError("GeometricSampler: max_rejections must be non-negative");
}

std::int64_t GeometricSampler::draw(Rng& rng) const {
    const double u = rng.uniform_open_low();
    if (gamma_ == 0.0) return 1;
    // P(delta > k) = P(u <= gamma^k) = gamma^k
    const double k = std::floor(std::log(u) / std::log(gamma_));
    if (k >= static_cast<double>(std::numeric_limits<std::int64_t>::max() / 2))
        return std::numeric_limits<std::int64_t>::max() / 2;
    return 1 + static_cast<std::int64_t>(k);
}

std::int64_t GeometricSampler::draw_truncated(std::int64_t remaining, Rng& rng) const {
    if (remaining < 1) throw std::invalid_argument("GeometricSampler: no future state available");
    for (int attempt = 0; attempt <= max_rejections_; ++attempt) {
        const std::int64_t d = draw(rng);
        if (d <= remaining) return d;
    }
    return remaining;
}

NceBatch NceBatch::select(const std::vector<Eigen::Index>& rows) const {
    NceBatch out;
    const auto n = static_cast<Eigen::Index>(rows.size());
    out.states.resize(n, states.cols());
    out.actions.resize(n, actions.cols());
    out.futures.resize(n, futures.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto r = rows[static_cast<std::size_t>(i)];
        out.states.row(i) = states.row(r);
        out.actions.row(i) = actions.row(r);
        out.futures.row(i) = futures.row(r);
        out.traj_ids.push_back(traj_ids[static_cast<std::size_t>(r)]);
        out.t.push_back(t[static_cast<std::size_t>(r)]);
        out.offsets.push_back(offsets[static_cast<std::size_t>(r)]);
    }
    return out;
}

namespace {

void require_nonempty(const BufferView& view) {
    if (view.num_transitions() == 0) throw std::invalid_argument("sampler: replay buffer is empty");
}

void init_batch(NceBatch& b, const TrajectoryBuffer& buffer, Eigen::Index n) {
    b.states.resize(n, buffer.observation_dim());
    b.actions.resize(n, buffer.stored_action_dim());
    b.futures.resize(n, buffer.goal_dim());
    b.traj_ids.resize(static_cast<std::size_t>(n));
    b.t.resize(static_cast<std::size_t>(n));
    b.offsets.resize(static_cast<std::size_t>(n));
}

// Draws the anchor transition of row i and returns its location.
TransitionRef draw_anchor(const BufferView& view, NceBatch& b, Eigen::Index i, Rng& rng) {
    const auto flat = static_cast<std::int64_t>(rng.uniform_int(static_cast<std::uint64_t>(view.num_transitions())));
    const TransitionRef ref = view.locate_transition(flat);
    const auto& traj = view.at(ref.slot);
    b.states.row(i) = traj.data.states.row(ref.t);
    b.actions.row(i) = traj.data.actions.row(ref.t);
    b.traj_ids[static_cast<std::size_t>(i)] = traj.id;
    b.t[static_cast<std::size_t>(i)] = ref.t;
    return ref;
}

void set_future(const BufferView& view, NceBatch& b, Eigen::Index i, const TransitionRef& ref, std::int64_t offset) {
    const auto& states = view.at(ref.slot).data.states;
    b.offsets[static_cast<std::size_t>(i)] = static_cast<Eigen::Index>(offset);
    b.futures.row(i) = states.row(ref.t + offset).head(view.goal_dim());
}

std::int64_t remaining_after(const BufferView& view, const TransitionRef& ref) {
    return view.at(ref.slot).data.length() - 1 - ref.t;
}

Matrix random_goals(const BufferView& view, Eigen::Index count, Rng& rng) {
    Matrix goals(count, view.goal_dim());
    for (Eigen::Index i = 0; i < count; ++i) {
        const auto flat = static_cast<std::int64_t>(rng.uniform_int(static_cast<std::uint64_t>(view.num_states())));
        const TransitionRef ref = view.locate_state(flat);
        goals.row(i) = view.at(ref.slot).data.states.row(ref.t).head(view.goal_dim());
    }
    return goals;
}

}  // namespace

NceBatch sample_nce_batch(const TrajectoryBuffer& buffer, const GeometricSampler& sampler, Eigen::Index batch_size,
                          Rng& rng) {
    if (batch_size < 1) throw std::invalid_argument("sample_nce_batch: batch size must be positive");
    return buffer.read([&](const BufferView& view) {
        require_nonempty(view);
        NceBatch b;
        init_batch(b, buffer, batch_size);
        for (Eigen::Index i = 0; i < batch_size; ++i) {
            const TransitionRef ref = draw_anchor(view, b, i, rng);
            set_future(view, b, i, ref, sampler.draw_truncated(remaining_after(view, ref), rng));
        }
        return b;
    });
}

MixtureBatch sample_mixture_batch(const TrajectoryBuffer& buffer, const GeometricSampler& sampler,
                                  Eigen::Index batch_size, Rng& rng) {
    if (batch_size < 1) throw std::invalid_argument("sample_mixture_batch: batch size must be positive");
    const double next_prob = (1.0 - sampler.gamma()) / (2.0 - sampler.gamma());
    return buffer.read([&](const BufferView& view) {
        require_nonempty(view);
        MixtureBatch m;
        init_batch(m.batch, buffer, batch_size);
        m.next_state_branch.resize(static_cast<std::size_t>(batch_size));
        m.next_states.resize(batch_size, buffer.observation_dim());
        for (Eigen::Index i = 0; i < batch_size; ++i) {
            const TransitionRef ref = draw_anchor(view, m.batch, i, rng);
            m.next_states.row(i) = view.at(ref.slot).data.states.row(ref.t + 1);
            const bool next = rng.bernoulli(next_prob);
            m.next_state_branch[static_cast<std::size_t>(i)] = next;
            const std::int64_t offset = next ? 1 : sampler.draw_truncated(remaining_after(view, ref), rng);
            set_future(view, m.batch, i, ref, offset);
        }
        return m;
    });
}

TdBatch sample_td_batch(const TrajectoryBuffer& buffer, Eigen::Index batch_size, Rng& rng) {
    if (batch_size < 1) throw std::invalid_argument("sample_td_batch: batch size must be positive");
    return buffer.read([&](const BufferView& view) {
        require_nonempty(view);
        TdBatch b;
        b.states.resize(batch_size, buffer.observation_dim());
        b.actions.resize(batch_size, buffer.stored_action_dim());
        b.next_states.resize(batch_size, buffer.observation_dim());
        for (Eigen::Index i = 0; i < batch_size; ++i) {
            const auto flat =
                static_cast<std::int64_t>(rng.uniform_int(static_cast<std::uint64_t>(view.num_transitions())));
            const TransitionRef ref = view.locate_transition(flat);
            const auto& traj = view.at(ref.slot);
            b.states.row(i) = traj.data.states.row(ref.t);
            b.actions.row(i) = traj.data.actions.row(ref.t);
            b.next_states.row(i) = traj.data.states.row(ref.t + 1);
            b.traj_ids.push_back(traj.id);
            b.t.push_back(ref.t);
        }
        b.goals = random_goals(view, batch_size, rng);
        return b;
    });
}

Matrix sample_random_goals(const TrajectoryBuffer& buffer, Eigen::Index count, Rng& rng) {
    return buffer.read([&](const BufferView& view) {
        require_nonempty(view);
        return random_goals(view, count, rng);
    });
}

ActorGoalSource ActorGoalSource::parse(const std::string& text) {
    if (text == "random") return {Kind::random, 0.0};
    if (text == "future") return {Kind::future, 1.0};
    double p = 0.0;
    char tail = 0;
    if (std::sscanf(text.c_str(), "mix(%lf%c", &p, &tail) == 2 && tail == ')' &&
        text.find(')') == text.size() - 1) {
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("actor goal source: mix probability must be in [0, 1]");
        return {Kind::mix, p};
    }
    throw ConfigError("actor goal source: expected random, future or mix(p), got '" + text + "'");
}

std::string ActorGoalSource::to_string() const {
    switch (kind) {
        case Kind::random: return "random";
        case Kind::future: return "future";
        case Kind::mix: {
            char buf[64];
            std::snprintf(buf, sizeof buf, "mix(%.17g)", future_prob);
            return buf;
        }
    }
    return "random";
}

Matrix sample_actor_goals(const TrajectoryBuffer& buffer, const GeometricSampler& sampler,
                          const ActorGoalSource& source, const NceBatch& batch, Rng& rng,
                          std::vector<bool>* used_future) {
    if (source.kind == ActorGoalSource::Kind::mix && !(source.future_prob >= 0.0 && source.future_prob <= 1.0))
        throw ConfigError("sample_actor_goals: mix probability must be in [0, 1]");
    const Eigen::Index n = batch.size();
    ActorGoalSource::Kind kind = source.kind;
    if (kind == ActorGoalSource::Kind::mix && source.future_prob == 0.0) kind = ActorGoalSource::Kind::random;
    if (kind == ActorGoalSource::Kind::mix && source.future_prob == 1.0) kind = ActorGoalSource::Kind::future;

    return buffer.read([&](const BufferView& view) {
        require_nonempty(view);
        if (used_future) used_future->assign(static_cast<std::size_t>(n), kind == ActorGoalSource::Kind::future);
        if (kind == ActorGoalSource::Kind::random) return random_goals(view, n, rng);

        // ids are increasing along the deque, so rows map back by binary search
        auto find_slot = [&](std::uint64_t id) {
            const auto& trajs = view.trajectories();
            std::size_t lo = 0;
            std::size_t hi = trajs.size();
            while (lo < hi) {
                const std::size_t mid = (lo + hi) / 2;
                if (trajs[mid].id < id) lo = mid + 1;
                else hi = mid;
            }
            if (lo == trajs.size() || trajs[lo].id != id)
                throw std::invalid_argument("sample_actor_goals: batch trajectory no longer stored");
            return lo;
        };
        auto future_goal = [&](Eigen::Index i) -> RowVector {
            const std::size_t slot = find_slot(batch.traj_ids[static_cast<std::size_t>(i)]);
            const auto& states = view.at(slot).data.states;
            const Eigen::Index t = batch.t[static_cast<std::size_t>(i)];
            const std::int64_t d = sampler.draw_truncated(states.rows() - 1 - t, rng);
            return states.row(t + d).head(view.goal_dim());
        };

        Matrix goals(n, view.goal_dim());
        for (Eigen::Index i = 0; i < n; ++i) {
            bool future = kind == ActorGoalSource::Kind::future;
            if (kind == ActorGoalSource::Kind::mix) {
                future = rng.bernoulli(source.future_prob);
                if (used_future) (*used_future)[static_cast<std::size_t>(i)] = future;
            }
            if (future) {
                goals.row(i) = future_goal(i);
            } else {
                goals.row(i) = random_goals(view, 1, rng).row(0);
            }
        }
        return goals;
    });
}

}  // namespace crl
