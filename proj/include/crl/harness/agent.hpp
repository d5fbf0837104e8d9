#pragma once

#include <optional>
#include <string>
#include <vector>

#include "crl/actor/goal_policy.hpp"
#include "crl/baselines/density_model.hpp"
#include "crl/critic/contrastive_critic.hpp"
#include "crl/harness/checkpoint.hpp"
#include "crl/harness/config.hpp"
#include "crl/numcore/adam.hpp"

namespace crl {

/// Every trained component of a run with its own Adam optimizer. Critics and
/// the density model exist only for variants that use them.
struct Agent {
    Variant variant = Variant::nce;
    EnvSpec spec;
    GoalPolicy policy;
    Adam policy_opt;
    std::vector<ContrastiveCritic> critics;
    std::vector<Adam> critic_sa_opt;
    std::vector<Adam> critic_g_opt;
    std::optional<DensityModel> density;
    Adam density_opt;

    /// Initializes from `seed` with one independent stream per component, so
    /// the policy is the same whatever else the variant builds.
    Agent(const AgentConfig& config, const EnvSpec& spec, std::uint64_t seed, int num_critics = 1);
    Agent() = default;

    bool uses_critic() const { return !critics.empty(); }

    /// Single-observation action in stored form.
    Vector act(const Vector& observation, const Vector& goal, Rng& rng, bool deterministic) const;

    void update_policy(const ParamList& grads);
    void update_critic(std::size_t k, const CriticGrads& grads);
    void update_density(const ParamList& grads);

    /// Parameters under "param/<name>", optimizer moments under
    /// "adam/<name>/m|v" and step counts under "adam/<component>/t".
    void save(Checkpoint& ck) const;
    /// Requires an agent built with the same config; throws CheckpointError on
    /// missing entries or shape mismatch.
    void load(const Checkpoint& ck);
};

}  // namespace crl
