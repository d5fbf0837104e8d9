#include "crl/harness/agent.hpp"

namespace crl {

namespace {

constexpr std::uint64_t kPolicyStream = 1;
constexpr std::uint64_t kDensityStream = 3;
constexpr std::uint64_t kCriticStreamBase = 100;

void save_component(Checkpoint& ck, const std::string& component, const ParamList& params, const Adam& opt) {
    const auto& names = opt.names();
    for (std::size_t i = 0; i < params.size(); ++i) {
        ck.put("param/" + names[i], params[i]);
        ck.put("adam/" + names[i] + "/m", opt.state().first_moment[i]);
        ck.put("adam/" + names[i] + "/v", opt.state().second_moment[i]);
    }
    ck.put_i64("adam/" + component + "/t", opt.state().step_count);
}

void load_matrix(const Checkpoint& ck, const std::string& name, Matrix& into) {
    const Matrix& m = ck.matrix(name);
    if (m.rows() != into.rows() || m.cols() != into.cols())
        throw CheckpointError("checkpoint entry '" + name + "' has the wrong shape");
    into = m;
}

void load_component(const Checkpoint& ck, const std::string& component, ParamList& params, Adam& opt) {
    const auto& names = opt.names();
    for (std::size_t i = 0; i < params.size(); ++i) {
        load_matrix(ck, "param/" + names[i], params[i]);
        load_matrix(ck, "adam/" + names[i] + "/m", opt.state().first_moment[i]);
        load_matrix(ck, "adam/" + names[i] + "/v", opt.state().second_moment[i]);
    }
    opt.state().step_count = ck.i64("adam/" + component + "/t");
}

std::vector<std::string> prefixed(const std::vector<std::string>& names, const std::string& prefix) {
    std::vector<std::string> out;
    for (const auto& n : names) out.push_back(prefix + n);
    return out;
}

}  // namespace

Agent::Agent(const AgentConfig& config, const EnvSpec& env_spec, std::uint64_t seed, int num_critics)
    : variant(config.variant), spec(env_spec) {
    const Rng root(seed);
    AdamConfig adam;
    adam.learning_rate = config.learning_rate;

    Rng policy_rng = root.split(kPolicyStream);
    policy = GoalPolicy(spec.observation_dim, spec.goal_dim, spec.action, config.hidden, policy_rng, config.min_std);
    policy_opt = Adam(adam, policy.param_names(), policy.params());

    const bool wants_critic = variant == Variant::nce || variant == Variant::cpc || variant == Variant::c_learning ||
                              variant == Variant::nce_plus_c;
    if (wants_critic) {
        for (int k = 0; k < num_critics; ++k) {
            Rng crng = root.split(kCriticStreamBase + static_cast<std::uint64_t>(k));
            critics.emplace_back(spec.observation_dim, spec.goal_dim, spec.action, config.hidden, config.repr_dim, crng);
            const std::string tag = "c" + std::to_string(k) + ".";
            critic_sa_opt.emplace_back(adam, prefixed(critics.back().sa_param_names(), tag), critics.back().sa_encoder.params());
            critic_g_opt.emplace_back(adam, prefixed(critics.back().g_param_names(), tag), critics.back().g_encoder.params());
        }
    }
    if (variant == Variant::model_based) {
        Rng drng = root.split(kDensityStream);
        density.emplace(spec.observation_dim, spec.action, DensityModel::Head::gaussian, spec.goal_dim, config.hidden,
                        drng, config.density_variance_floor);
        density_opt = Adam(adam, density->param_names(), density->params());
    }
}

Vector Agent::act(const Vector& observation, const Vector& goal, Rng& rng, bool deterministic) const {
    const Matrix s = observation.transpose();
    const Matrix g = goal.transpose();
    if (deterministic) return policy.act_deterministic(s, g).row(0).transpose();
    return policy.sample(s, g, rng).actions.row(0).transpose();
}

void Agent::update_policy(const ParamList& grads) { policy_opt.step(policy.params(), grads); }

void Agent::update_critic(std::size_t k, const CriticGrads& grads) {
    critic_sa_opt.at(k).step(critics.at(k).sa_encoder.params(), grads.sa);
    critic_g_opt.at(k).step(critics.at(k).g_encoder.params(), grads.g);
}

void Agent::update_density(const ParamList& grads) { density_opt.step(density.value().params(), grads); }

void Agent::save(Checkpoint& ck) const {
    ck.put("agent/variant", to_string(variant));
    ck.put_i64("agent/num_critics", static_cast<std::int64_t>(critics.size()));
    save_component(ck, "policy", policy.params(), policy_opt);
    for (std::size_t k = 0; k < critics.size(); ++k) {
        const std::string tag = "c" + std::to_string(k);
        save_component(ck, tag + ".sa", critics[k].sa_encoder.params(), critic_sa_opt[k]);
        save_component(ck, tag + ".g", critics[k].g_encoder.params(), critic_g_opt[k]);
    }
    if (density) save_component(ck, "density", density->params(), density_opt);
}

void Agent::load(const Checkpoint& ck) {
    if (ck.str("agent/variant") != to_string(variant))
        throw CheckpointError("checkpoint holds a '" + ck.str("agent/variant") + "' agent, expected '" +
                              to_string(variant) + "'");
    if (ck.i64("agent/num_critics") != static_cast<std::int64_t>(critics.size()))
        throw CheckpointError("checkpoint critic count does not match the config");
    load_component(ck, "policy", policy.params(), policy_opt);
    for (std::size_t k = 0; k < critics.size(); ++k) {
        const std::string tag = "c" + std::to_string(k);
        load_component(ck, tag + ".sa", critics[k].sa_encoder.params(), critic_sa_opt[k]);
        load_component(ck, tag + ".g", critics[k].g_encoder.params(), critic_g_opt[k]);
    }
    if (density) load_component(ck, "density", density->params(), density_opt);
}

}  // namespace crl
