#include "crl/harness/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <vector>

namespace crl {

namespace {

struct Episode {
    bool success = false;
    double final_distance = 0.0;
};

Episode run_episode(GoalEnv& env, const ActionFn& act, Rng rng) {
    const Vector goal = env.sample_goal(rng);
    Vector obs = env.reset(goal, rng);
    const EnvSpec& spec = env.spec();
    Episode ep;
    ep.success = success(obs, goal, spec);
    while (!env.done()) {
        obs = env.step(act(obs, goal, rng), rng).observation;
        ep.success = ep.success || success(obs, goal, spec);
    }
    ep.final_distance = goal_distance(obs, goal, spec);
    return ep;
}

}  // namespace

EvalResult evaluate(const GoalEnv& prototype, const ActionFn& act, int episodes, const Rng& base, int workers) {
    if (episodes < 1) throw ConfigError("evaluate: need at least one episode");
    workers = std::clamp(workers, 1, episodes);
    std::vector<Episode> results(static_cast<std::size_t>(episodes));
    auto work = [&](int first, int stride) {
        auto env = prototype.clone();
        for (int i = first; i < episodes; i += stride)
            results[static_cast<std::size_t>(i)] = run_episode(*env, act, base.split(static_cast<std::uint64_t>(i)));
    };
    if (workers == 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
        for (auto& t : pool) t.join();
    }
    EvalResult r;
    r.episodes = episodes;
    double dist = 0.0;
    for (const auto& e : results) {
        r.successes += e.success ? 1 : 0;
        dist += e.final_distance;
    }
    r.success_rate = static_cast<double>(r.successes) / episodes;
    r.standard_error = std::sqrt(r.success_rate * (1.0 - r.success_rate) / episodes);
    r.mean_final_distance = dist / episodes;
    return r;
}

ActionFn random_action_fn(const ActionSpace& space) {
    return [space](const Vector&, const Vector&, Rng& rng) {
        Vector a(space.stored_dim());
        if (space.kind == ActionKind::discrete) {
            a(0) = static_cast<double>(rng.uniform_int(static_cast<std::uint64_t>(space.size)));
        } else {
            for (int i = 0; i < space.size; ++i) a(i) = rng.uniform(-space.bound, space.bound);
        }
        return a;
    };
}

}  // namespace crl
