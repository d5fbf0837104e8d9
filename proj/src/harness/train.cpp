#include "crl/harness/train.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "crl/actor/actor_losses.hpp"
#include "crl/baselines/density_model.hpp"
#include "crl/baselines/gcbc.hpp"
#include "crl/critic/critic_losses.hpp"
#include "crl/replay/dataset_io.hpp"

namespace crl {

namespace fs = std::filesystem;

PointMaze make_maze_env(const EnvConfig& config) {
    PointMazeConfig pm;
    pm.cell_size = config.cell_size;
    pm.max_step = config.max_step;
    pm.max_episode_steps = config.horizon;
    pm.success_radius = config.success_radius;
    pm.start_noise = config.start_noise;
    const std::string prefix = "file:";
    if (config.name.rfind(prefix, 0) == 0) return PointMaze(MazeLayout::load(config.name.substr(prefix.size())), pm);
    return PointMaze(MazeLayout::builtin(config.name), pm);
}

TrainStreams::TrainStreams(std::uint64_t seed)
    : data(Rng(seed).split(10)), actor(Rng(seed).split(11)), collect(Rng(seed).split(12)), eval(Rng(seed).split(13)) {}

namespace {

GeometricSampler make_sampler(const ExperimentConfig& c) {
    return GeometricSampler(c.env.gamma, c.schedule.max_rejections);
}

FilterConfig make_filter(const AgentConfig& a) { return FilterConfig{a.filter_enabled, a.filter_epsilon}; }

// An NCE-shaped batch over consecutive transitions, used to draw actor goals
// for the TD variants.
NceBatch as_anchor_batch(const TdBatch& td, int goal_dim) {
    NceBatch b;
    b.states = td.states;
    b.actions = td.actions;
    b.futures = td.next_states.leftCols(goal_dim);
    b.traj_ids = td.traj_ids;
    b.t = td.t;
    b.offsets.assign(td.t.size(), 1);
    return b;
}

double actor_step(Agent& agent, const ExperimentConfig& config, const Matrix& states, const Matrix& goals,
                  Rng& actor_rng) {
    auto loss = actor_loss(agent.policy, agent.critics.front(), states, goals, config.agent.entropy_coeff, actor_rng);
    agent.update_policy(loss.grads);
    return loss.loss;
}

}  // namespace

UpdateStats online_update(Agent& agent, const ExperimentConfig& config, const TrajectoryBuffer& buffer,
                          TrainStreams& streams, FilterStats& filter_stats) {
    const auto& ac = config.agent;
    const Eigen::Index b = ac.batch_size;
    const GeometricSampler sampler = make_sampler(config);
    const ActorGoalSource source = ActorGoalSource::parse(ac.goal_source);
    const double gamma = config.env.gamma;
    UpdateStats st;

    switch (agent.variant) {
        case Variant::nce:
        case Variant::cpc: {
            const NceBatch batch = sample_nce_batch(buffer, sampler, b, streams.data);
            const NceBatch kept = filter_nce_batch(batch, buffer, agent.policy, make_filter(ac), &filter_stats);
            st.critic_rows = kept.size();
            if (kept.size() >= 2) {
                const CriticLoss loss = agent.variant == Variant::nce
                                            ? nce_loss(agent.critics[0], kept.states, kept.actions, kept.futures)
                                            : cpc_loss(agent.critics[0], kept.states, kept.actions, kept.futures,
                                                       ac.cpc_reg_coeff);
                agent.update_critic(0, loss.grads);
                st.critic_loss = loss.loss;
            }
            const Matrix goals = sample_actor_goals(buffer, sampler, source, batch, streams.data);
            st.actor_loss = actor_step(agent, config, batch.states, goals, streams.actor);
            break;
        }
        case Variant::c_learning: {
            const TdBatch td = sample_td_batch(buffer, b, streams.data);
            TdInputs in{td.states, td.actions, td.next_states, Matrix(), td.goals};
            in.next_actions = agent.policy.sample(td.next_states, td.goals, streams.actor).actions;
            const CriticLoss loss = c_learning_loss(agent.critics[0], in, gamma, ac.td_weight_clip);
            agent.update_critic(0, loss.grads);
            st.critic_loss = loss.loss;
            st.critic_rows = b;
            const Matrix goals =
                sample_actor_goals(buffer, sampler, source, as_anchor_batch(td, agent.spec.goal_dim), streams.data);
            st.actor_loss = actor_step(agent, config, td.states, goals, streams.actor);
            break;
        }
        case Variant::nce_plus_c: {
            const MixtureBatch m = sample_mixture_batch(buffer, sampler, b, streams.data);
            const Matrix random_goals = sample_random_goals(buffer, b, streams.data);
            TdInputs in{m.batch.states, m.batch.actions, m.next_states, Matrix(), random_goals};
            in.next_actions = agent.policy.sample(m.next_states, random_goals, streams.actor).actions;
            const CriticLoss loss =
                nce_plus_c_loss(agent.critics[0], in, m.batch.futures, gamma, ac.td_weight_clip);
            agent.update_critic(0, loss.grads);
            st.critic_loss = loss.loss;
            st.critic_rows = b;
            const Matrix goals = sample_actor_goals(buffer, sampler, source, m.batch, streams.data);
            st.actor_loss = actor_step(agent, config, m.batch.states, goals, streams.actor);
            break;
        }
        case Variant::gcbc: {
            const NceBatch batch = sample_nce_batch(buffer, sampler, b, streams.data);
            const ActorLoss loss = gcbc_loss(agent.policy, batch.states, batch.actions, batch.futures);
            agent.update_policy(loss.grads);
            st.actor_loss = loss.loss;
            break;
        }
        case Variant::model_based: {
            const NceBatch batch = sample_nce_batch(buffer, sampler, b, streams.data);
            const DensityLoss dl = density_loss(*agent.density, batch.states, batch.actions, batch.futures);
            agent.update_density(dl.grads);
            st.density_loss = dl.loss;
            const Matrix goals = sample_actor_goals(buffer, sampler, source, batch, streams.data);
            const ActorLoss al =
                mb_actor_loss(agent.policy, *agent.density, batch.states, goals, ac.entropy_coeff, streams.actor);
            agent.update_policy(al.grads);
            st.actor_loss = al.loss;
            break;
        }
    }
    return st;
}

UpdateStats offline_update(Agent& agent, const ExperimentConfig& config, const TrajectoryBuffer& buffer,
                           TrainStreams& streams) {
    const GeometricSampler sampler = make_sampler(config);
    const NceBatch batch = sample_nce_batch(buffer, sampler, config.agent.batch_size, streams.data);
    UpdateStats st;
    if (agent.variant == Variant::gcbc) {
        const ActorLoss loss = gcbc_loss(agent.policy, batch.states, batch.actions, batch.futures);
        agent.update_policy(loss.grads);
        st.actor_loss = loss.loss;
        return st;
    }
    if (agent.variant != Variant::nce) throw ConfigError("offline training supports the nce and gcbc variants");
    for (std::size_t k = 0; k < agent.critics.size(); ++k) {
        const CriticLoss loss = nce_loss(agent.critics[k], batch.states, batch.actions, batch.futures);
        agent.update_critic(k, loss.grads);
        if (k == 0) st.critic_loss = loss.loss;
    }
    st.critic_rows = batch.size();
    const ActorGoalSource source = ActorGoalSource::parse(config.offline.goal_source);
    // Future goals reuse the batch's own relabeled futures.
    const Matrix goals = source.kind == ActorGoalSource::Kind::future
                             ? batch.futures
                             : sample_actor_goals(buffer, sampler, source, batch, streams.data);
    const ActorLoss loss = offline_actor_loss(agent.policy, agent.critics, batch.states, batch.actions, goals,
                                              config.offline.lambda, streams.actor);
    agent.update_policy(loss.grads);
    st.actor_loss = loss.loss;
    return st;
}

EvalResult evaluate_agent(const Agent& agent, const GoalEnv& env, int episodes, const Rng& base, int workers) {
    const ActionFn act = [&agent](const Vector& obs, const Vector& goal, Rng& rng) {
        return agent.act(obs, goal, rng, true);
    };
    return evaluate(env, act, episodes, base, workers);
}

namespace {

// Episode under construction during online collection.
struct Collector {
    PointMaze env;
    bool active = false;
    std::vector<Vector> states;
    std::vector<Vector> actions;

    explicit Collector(PointMaze e) : env(std::move(e)) {}

    void step(const Agent& agent, bool random, Rng& rng, TrajectoryBuffer& buffer) {
        if (!active) {
            const Vector goal = env.sample_goal(rng);
            states = {env.reset(goal, rng)};
            actions.clear();
            active = true;
        }
        Vector a;
        if (random) a = random_action_fn(env.spec().action)(states.back(), env.commanded_goal(), rng);
        else a = agent.act(states.back(), env.commanded_goal(), rng, false);
        const StepResult r = env.step(a, rng);
        actions.push_back(a);
        states.push_back(r.observation);
        if (r.done) {
            Trajectory t;
            t.states.resize(static_cast<Eigen::Index>(states.size()), env.spec().observation_dim);
            t.actions.resize(static_cast<Eigen::Index>(actions.size()), env.spec().action.stored_dim());
            for (std::size_t i = 0; i < states.size(); ++i) t.states.row(static_cast<Eigen::Index>(i)) = states[i];
            for (std::size_t i = 0; i < actions.size(); ++i) t.actions.row(static_cast<Eigen::Index>(i)) = actions[i];
            t.commanded_goal = env.commanded_goal();
            buffer.insert(std::move(t));
            active = false;
        }
    }

    void save(Checkpoint& ck) const {
        ck.put("collector/active", static_cast<std::uint64_t>(active));
        if (!active) return;
        Matrix s(static_cast<Eigen::Index>(states.size()), env.spec().observation_dim);
        for (std::size_t i = 0; i < states.size(); ++i) s.row(static_cast<Eigen::Index>(i)) = states[i];
        Matrix a(static_cast<Eigen::Index>(actions.size()), env.spec().action.stored_dim());
        for (std::size_t i = 0; i < actions.size(); ++i) a.row(static_cast<Eigen::Index>(i)) = actions[i];
        ck.put("collector/states", s);
        ck.put("collector/actions", a);
        ck.put("collector/goal", Matrix(env.commanded_goal().transpose()));
        ck.put_i64("collector/steps", env.steps_taken());
    }

    void load(const Checkpoint& ck) {
        active = ck.u64("collector/active") != 0;
        states.clear();
        actions.clear();
        if (!active) return;
        const Matrix& s = ck.matrix("collector/states");
        const Matrix& a = ck.matrix("collector/actions");
        for (Eigen::Index i = 0; i < s.rows(); ++i) states.push_back(s.row(i).transpose());
        for (Eigen::Index i = 0; i < a.rows(); ++i) actions.push_back(a.row(i).transpose());
        env.restore(states.back(), ck.matrix("collector/goal").row(0).transpose(),
                    static_cast<int>(ck.i64("collector/steps")));
    }
};

void save_buffer(Checkpoint& ck, const TrajectoryBuffer& buffer) {
    const auto snap = buffer.snapshot();
    ck.put("buffer/count", static_cast<std::uint64_t>(snap.size()));
    ck.put("buffer/next_id", buffer.next_id());
    for (std::size_t i = 0; i < snap.size(); ++i) {
        const std::string p = "buffer/" + std::to_string(i) + "/";
        ck.put(p + "id", snap[i].id);
        ck.put(p + "states", snap[i].data.states);
        ck.put(p + "actions", snap[i].data.actions);
        ck.put(p + "goal", Matrix(snap[i].data.commanded_goal.transpose()));
    }
}

void load_buffer(const Checkpoint& ck, TrajectoryBuffer& buffer) {
    std::vector<StoredTrajectory> trajs(ck.u64("buffer/count"));
    for (std::size_t i = 0; i < trajs.size(); ++i) {
        const std::string p = "buffer/" + std::to_string(i) + "/";
        trajs[i].id = ck.u64(p + "id");
        trajs[i].data.states = ck.matrix(p + "states");
        trajs[i].data.actions = ck.matrix(p + "actions");
        trajs[i].data.commanded_goal = ck.matrix(p + "goal").row(0).transpose();
    }
    buffer.restore(std::move(trajs), ck.u64("buffer/next_id"));
}

void save_streams(Checkpoint& ck, const TrainStreams& s) {
    ck.put("rng/data", s.data.state());
    ck.put("rng/actor", s.actor.state());
    ck.put("rng/collect", s.collect.state());
    ck.put("rng/eval", s.eval.state());
}

void load_streams(const Checkpoint& ck, TrainStreams& s) {
    s.data.set_state(ck.u64("rng/data"));
    s.actor.set_state(ck.u64("rng/actor"));
    s.collect.set_state(ck.u64("rng/collect"));
    s.eval.set_state(ck.u64("rng/eval"));
}

void save_filter(Checkpoint& ck, const FilterStats& f) {
    ck.put_i64("filter/considered", f.considered);
    ck.put_i64("filter/kept", f.kept);
    ck.put_i64("filter/rejected", f.rejected);
    ck.put_i64("filter/zero_denominator", f.zero_denominator);
}

void load_filter(const Checkpoint& ck, FilterStats& f) {
    f.considered = ck.i64("filter/considered");
    f.kept = ck.i64("filter/kept");
    f.rejected = ck.i64("filter/rejected");
    f.zero_denominator = ck.i64("filter/zero_denominator");
}

void write_config(const ExperimentConfig& config, const std::string& out_dir) {
    std::ofstream out(fs::path(out_dir) / "config.txt");
    if (!out) throw std::runtime_error("cannot write config.txt in '" + out_dir + "'");
    out << config.to_text();
}

Checkpoint checkpoint_header(const ExperimentConfig& config, const std::string& mode) {
    Checkpoint ck;
    ck.config_hash = config.hash();
    ck.put("run/mode", mode);
    ck.put("run/config", config.to_text());
    return ck;
}

Checkpoint load_resume(const std::string& path, const ExperimentConfig& config, const std::string& mode) {
    Checkpoint ck = Checkpoint::load(path);
    if (ck.config_hash != config.hash()) throw ConfigError("checkpoint '" + path + "' was written with a different config");
    if (ck.str("run/mode") != mode) throw ConfigError("checkpoint '" + path + "' is not a " + mode + " run");
    return ck;
}

// Emits records and forwards them to the observer.
struct Logger {
    MetricsWriter writer;
    std::uint64_t seed;
    const RunOptions& options;

    void log(std::int64_t wall, std::int64_t env, const std::string& name, double value) {
        MetricsRecord r{wall, env, name, value, seed};
        writer.write(r);
        if (options.on_metric) options.on_metric(r);
    }

    void log_eval(std::int64_t wall, std::int64_t env, const EvalResult& e) {
        log(wall, env, "eval/success_rate", e.success_rate);
        log(wall, env, "eval/success_se", e.standard_error);
        log(wall, env, "eval/mean_final_distance", e.mean_final_distance);
    }

    void log_update(std::int64_t wall, std::int64_t env, const Agent& agent, const UpdateStats& st) {
        if (agent.uses_critic()) log(wall, env, "train/critic_loss", st.critic_loss);
        if (agent.density) log(wall, env, "train/density_loss", st.density_loss);
        log(wall, env, "train/actor_loss", st.actor_loss);
    }
};

}  // namespace

RunResult train_online(const ExperimentConfig& config, const std::string& out_dir, const RunOptions& options) {
    config.validate();
    fs::create_directories(out_dir);
    const auto& sc = config.schedule;

    PointMaze env = make_maze_env(config.env);
    Agent agent(config.agent, env.spec(), config.seed);
    TrajectoryBuffer buffer(env.spec().observation_dim, env.spec().action.stored_dim(), env.spec().goal_dim,
                            sc.buffer_capacity);
    TrainStreams streams(config.seed);
    Collector collector(env);
    FilterStats filter_stats;

    std::int64_t env_steps = 0;
    std::int64_t learner_steps = 0;
    double owed = 0.0;
    std::int64_t next_eval = sc.eval_interval;
    std::int64_t next_ckpt = sc.checkpoint_interval > 0 ? sc.checkpoint_interval : -1;
    std::int64_t last_eval_at = -1;
    EvalResult last_eval;
    std::int64_t kept_records = 0;

    if (!options.resume_from.empty()) {
        const Checkpoint ck = load_resume(options.resume_from, config, "online");
        agent.load(ck);
        load_buffer(ck, buffer);
        load_streams(ck, streams);
        collector.load(ck);
        load_filter(ck, filter_stats);
        env_steps = ck.i64("run/env_steps");
        learner_steps = ck.i64("run/learner_steps");
        owed = ck.f64("run/owed");
        next_eval = ck.i64("run/next_eval");
        next_ckpt = ck.i64("run/next_ckpt");
        last_eval_at = ck.i64("run/last_eval_at");
        kept_records = ck.i64("run/metrics_records");
    }
    write_config(config, out_dir);
    Logger logger{MetricsWriter((fs::path(out_dir) / "metrics.jsonl").string(), kept_records), config.seed, options};
    const std::string ckpt_path = (fs::path(out_dir) / "checkpoint.bin").string();

    auto save = [&] {
        Checkpoint ck = checkpoint_header(config, "online");
        ck.put_i64("run/env_steps", env_steps);
        ck.put_i64("run/learner_steps", learner_steps);
        ck.put_f64("run/owed", owed);
        ck.put_i64("run/next_eval", next_eval);
        ck.put_i64("run/next_ckpt", next_ckpt);
        ck.put_i64("run/last_eval_at", last_eval_at);
        ck.put_i64("run/metrics_records", logger.writer.records_written());
        save_streams(ck, streams);
        save_filter(ck, filter_stats);
        agent.save(ck);
        collector.save(ck);
        save_buffer(ck, buffer);
        ck.save(ckpt_path);
    };
    auto run_eval = [&] {
        last_eval = evaluate_agent(agent, env, sc.eval_episodes, streams.eval, sc.eval_workers);
        last_eval_at = env_steps;
        logger.log_eval(learner_steps, env_steps, last_eval);
        if (make_filter(config.agent).active())
            logger.log(learner_steps, env_steps, "filter/kept_fraction",
                       filter_stats.considered ? static_cast<double>(filter_stats.kept) / filter_stats.considered : 1.0);
    };

    RunResult result;
    while (env_steps < sc.total_env_steps) {
        if (options.stop_at >= 0 && env_steps >= options.stop_at) {
            save();
            result.env_steps = env_steps;
            result.learner_steps = learner_steps;
            result.filter = filter_stats;
            result.checkpoint_path = ckpt_path;
            result.final_eval = last_eval;
            return result;
        }
        const bool random_phase = env_steps < sc.initial_random_steps;
        std::int64_t chunk = std::min(sc.train_collect_interval, sc.total_env_steps - env_steps);
        if (random_phase) chunk = std::min(chunk, sc.initial_random_steps - env_steps);
        for (std::int64_t i = 0; i < chunk; ++i) collector.step(agent, random_phase, streams.collect, buffer);
        env_steps += chunk;

        if (!random_phase) {
            owed += static_cast<double>(chunk) * sc.samples_per_insert / config.agent.batch_size;
            const auto n = static_cast<std::int64_t>(std::floor(owed));
            owed -= static_cast<double>(n);
            for (std::int64_t k = 0; k < n && buffer.num_transitions() > 0; ++k) {
                const UpdateStats st = online_update(agent, config, buffer, streams, filter_stats);
                ++learner_steps;
                if (learner_steps % sc.log_interval == 0) logger.log_update(learner_steps, env_steps, agent, st);
            }
        }
        if (env_steps >= next_eval) {
            run_eval();
            while (next_eval <= env_steps) next_eval += sc.eval_interval;
        }
        if (next_ckpt > 0 && env_steps >= next_ckpt) {
            save();
            while (next_ckpt <= env_steps) next_ckpt += sc.checkpoint_interval;
        }
    }
    if (last_eval_at != env_steps) run_eval();
    save();
    result.env_steps = env_steps;
    result.learner_steps = learner_steps;
    result.completed = true;
    result.final_eval = last_eval;
    result.filter = filter_stats;
    result.checkpoint_path = ckpt_path;
    return result;
}

RunResult train_offline(const ExperimentConfig& config, const std::string& out_dir, const RunOptions& options) {
    config.validate();
    if (config.offline.dataset.empty()) throw ConfigError("offline.dataset must name a dataset file");
    fs::create_directories(out_dir);
    const auto& sc = config.schedule;

    PointMaze env = make_maze_env(config.env);
    const Dataset dataset = load_dataset(config.offline.dataset);
    if (dataset.observation_dim != env.spec().observation_dim || dataset.goal_dim != env.spec().goal_dim ||
        dataset.stored_action_dim != env.spec().action.stored_dim())
        throw ConfigError("dataset dimensions do not match environment '" + config.env.name + "'");
    std::int64_t capacity = std::max<std::int64_t>(dataset.num_transitions(), 1);
    TrajectoryBuffer buffer(dataset.observation_dim, dataset.stored_action_dim, dataset.goal_dim, capacity);
    fill_buffer(buffer, dataset);

    const int num_critics = config.agent.variant == Variant::gcbc ? 0 : config.offline.num_critics;
    Agent agent(config.agent, env.spec(), config.seed, num_critics);
    TrainStreams streams(config.seed);

    std::int64_t learner_steps = 0;
    std::int64_t next_eval = sc.eval_interval;
    std::int64_t last_eval_at = -1;
    std::int64_t kept_records = 0;
    EvalResult last_eval;
    if (!options.resume_from.empty()) {
        const Checkpoint ck = load_resume(options.resume_from, config, "offline");
        agent.load(ck);
        load_streams(ck, streams);
        learner_steps = ck.i64("run/learner_steps");
        next_eval = ck.i64("run/next_eval");
        last_eval_at = ck.i64("run/last_eval_at");
        kept_records = ck.i64("run/metrics_records");
    }
    write_config(config, out_dir);
    Logger logger{MetricsWriter((fs::path(out_dir) / "metrics.jsonl").string(), kept_records), config.seed, options};
    const std::string ckpt_path = (fs::path(out_dir) / "checkpoint.bin").string();

    auto save = [&] {
        Checkpoint ck = checkpoint_header(config, "offline");
        ck.put_i64("run/env_steps", 0);
        ck.put_i64("run/learner_steps", learner_steps);
        ck.put_i64("run/next_eval", next_eval);
        ck.put_i64("run/last_eval_at", last_eval_at);
        ck.put_i64("run/metrics_records", logger.writer.records_written());
        save_streams(ck, streams);
        agent.save(ck);
        ck.save(ckpt_path);
    };
    auto run_eval = [&] {
        last_eval = evaluate_agent(agent, env, sc.eval_episodes, streams.eval, sc.eval_workers);
        last_eval_at = learner_steps;
        logger.log_eval(learner_steps, 0, last_eval);
    };

    RunResult result;
    while (learner_steps < config.offline.gradient_steps) {
        if (options.stop_at >= 0 && learner_steps >= options.stop_at) {
            save();
            result.learner_steps = learner_steps;
            result.checkpoint_path = ckpt_path;
            result.final_eval = last_eval;
            return result;
        }
        const UpdateStats st = offline_update(agent, config, buffer, streams);
        ++learner_steps;
        if (learner_steps % sc.log_interval == 0) logger.log_update(learner_steps, 0, agent, st);
        if (learner_steps >= next_eval) {
            run_eval();
            next_eval += sc.eval_interval;
        }
    }
    if (last_eval_at != learner_steps) run_eval();
    save();
    result.learner_steps = learner_steps;
    result.completed = true;
    result.final_eval = last_eval;
    result.checkpoint_path = ckpt_path;
    return result;
}

LoadedRun load_run(const std::string& checkpoint_path) {
    const Checkpoint ck = Checkpoint::load(checkpoint_path);
    LoadedRun run;
    run.config = ExperimentConfig::parse(ck.str("run/config"));
    if (run.config.hash() != ck.config_hash) throw CheckpointError("checkpoint config hash mismatch");
    const PointMaze env = make_maze_env(run.config.env);
    const bool offline = ck.str("run/mode") == "offline";
    const int num_critics =
        offline ? (run.config.agent.variant == Variant::gcbc ? 0 : run.config.offline.num_critics) : 1;
    run.agent = Agent(run.config.agent, env.spec(), run.config.seed, num_critics);
    run.agent.load(ck);
    run.env_steps = ck.i64("run/env_steps");
    run.learner_steps = ck.i64("run/learner_steps");
    return run;
}

}  // namespace crl
