#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "crl/harness/expert.hpp"
#include "crl/harness/train.hpp"

namespace crl {
namespace {

namespace fs = std::filesystem;

std::string fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("crl_harness_" + name);
    fs::remove_all(p);
    return p.string();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig tiny_config(Variant variant = Variant::nce) {
    ExperimentConfig c;
    c.env.name = "empty5";
    c.env.gamma = 0.9;
    c.env.horizon = 20;
    c.agent.variant = variant;
    c.agent.repr_dim = 8;
    c.agent.hidden = {16, 16};
    c.agent.batch_size = 16;
    c.schedule.initial_random_steps = 200;
    c.schedule.train_collect_interval = 8;
    c.schedule.samples_per_insert = 8.0;
    c.schedule.total_env_steps = 1000;
    c.schedule.eval_interval = 400;
    c.schedule.eval_episodes = 5;
    c.schedule.log_interval = 10;
    c.schedule.buffer_capacity = 100'000;
    c.offline.gradient_steps = 120;
    c.seed = 7;
    return c;
}

std::string expert_dataset(const std::string& name) {
    const std::string path = (fs::temp_directory_path() / ("crl_harness_" + name + ".crld")).string();
    const auto c = tiny_config();
    const PointMaze maze = make_maze_env(c.env);
    Rng rng(3);
    save_dataset(path, collect_expert_dataset(maze, 30, ExpertConfig{0.2, 0.1}, rng, c.env.name));
    return path;
}

std::vector<MetricsRecord> without_filter_records(const std::vector<MetricsRecord>& records) {
    std::vector<MetricsRecord> out;
    for (const auto& r : records)
        if (r.name.rfind("filter/", 0) != 0) out.push_back(r);
    return out;
}

void expect_same_records(const std::vector<MetricsRecord>& a, const std::vector<MetricsRecord>& b) {
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].to_json(), b[i].to_json()) << "record " << i;
}

void expect_same_params(const ParamList& a, const ParamList& b) {
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(a[i] == b[i]) << "parameter " << i;
}

TEST(Config, DefaultsAreValid) {
    const ExperimentConfig c;
    EXPECT_TRUE(c.problems().empty());
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.agent.batch_size, 256);
    EXPECT_EQ(c.schedule.buffer_capacity, 1'000'000);
}

TEST(Config, ReportsEveryProblem) {
    ExperimentConfig c;
    c.env.gamma = 1.5;
    c.agent.batch_size = 0;
    EXPECT_GE(c.problems().size(), 2u);
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, UnknownKeysAndBadValuesThrow) {
    ExperimentConfig c;
    EXPECT_THROW(c.set("agent.no_such_key", "1"), ConfigError);
    EXPECT_THROW(c.set("agent.batch_size", "many"), ConfigError);
    EXPECT_THROW(c.set("agent.variant", "sarsa"), ConfigError);
    EXPECT_THROW(ExperimentConfig::load("/nonexistent/config.txt"), ConfigError);
}

TEST(Config, TextRoundTripPreservesHash) {
    ExperimentConfig c = tiny_config(Variant::c_learning);
    c.agent.filter_enabled = true;
    c.agent.filter_epsilon = 0.25;
    const auto back = ExperimentConfig::parse(c.to_text());
    EXPECT_EQ(back.to_text(), c.to_text());
    EXPECT_EQ(back.hash(), c.hash());
    c.agent.learning_rate *= 2.0;
    EXPECT_NE(back.hash(), c.hash());
}

TEST(Config, ParseIgnoresCommentsAndBlankLines) {
    const auto c = ExperimentConfig::parse("# comment\n\nagent.batch_size = 32  # trailing\nseed = 4\n");
    EXPECT_EQ(c.agent.batch_size, 32);
    EXPECT_EQ(c.seed, 4u);
}

TEST(Checkpoint, SaveLoadSaveIsByteIdentical) {
    Checkpoint ck;
    ck.config_hash = 42;
    ck.put("a", Matrix::Constant(2, 3, 0.1));
    ck.put("b", std::uint64_t{7});
    ck.put("c", std::string("text"));
    ck.put_f64("d", -1.5);
    const std::string bytes = ck.serialize();
    const Checkpoint back = Checkpoint::deserialize(bytes);
    EXPECT_EQ(back.serialize(), bytes);
    EXPECT_EQ(back.u64("b"), 7u);
    EXPECT_EQ(back.str("c"), "text");
    EXPECT_EQ(back.f64("d"), -1.5);
    EXPECT_EQ(back.config_hash, 42u);
}

TEST(Checkpoint, CorruptionIsDetected) {
    Checkpoint ck;
    ck.put("a", Matrix::Constant(4, 4, 2.0));
    std::string bytes = ck.serialize();
    for (std::size_t pos : {std::size_t{0}, std::size_t{9}, bytes.size() / 2, bytes.size() - 1}) {
        std::string bad = bytes;
        bad[pos] = static_cast<char>(bad[pos] ^ 0x5a);
        EXPECT_THROW(Checkpoint::deserialize(bad), CheckpointError) << "byte " << pos;
    }
    EXPECT_THROW(Checkpoint::deserialize(bytes.substr(0, bytes.size() - 3)), CheckpointError);
    EXPECT_THROW(ck.matrix("missing"), CheckpointError);
}

TEST(Metrics, RecordJsonRoundTrip) {
    MetricsRecord r{12, 3400, "eval/success_rate", 0.125, 9};
    const auto back = MetricsRecord::from_json(r.to_json());
    EXPECT_EQ(back.wall_step, 12);
    EXPECT_EQ(back.env_steps, 3400);
    EXPECT_EQ(back.name, "eval/success_rate");
    EXPECT_EQ(back.value, 0.125);
    EXPECT_EQ(back.seed, 9u);
}

TEST(TrainOnline, MetricsFollowTheSchema) {
    const auto dir = fresh_dir("schema");
    const auto c = tiny_config();
    const auto result = train_online(c, dir);
    EXPECT_TRUE(result.completed);
    EXPECT_EQ(result.env_steps, 1000);
    const auto records = read_metrics(dir + "/metrics.jsonl");
    ASSERT_FALSE(records.empty());
    const std::set<std::string> allowed{"eval/success_rate", "eval/success_se", "eval/mean_final_distance",
                                        "train/critic_loss", "train/actor_loss"};
    std::int64_t last_env = 0;
    int evals = 0;
    for (const auto& r : records) {
        EXPECT_TRUE(allowed.count(r.name)) << r.name;
        EXPECT_GE(r.env_steps, last_env);
        EXPECT_EQ(r.seed, 7u);
        last_env = r.env_steps;
        if (r.name == "eval/success_rate") {
            ++evals;
            EXPECT_GE(r.value, 0.0);
            EXPECT_LE(r.value, 1.0);
        }
    }
    EXPECT_EQ(evals, 3);  // at 400, 800 and the final 1000
    EXPECT_TRUE(fs::exists(dir + "/config.txt"));
    EXPECT_EQ(ExperimentConfig::load(dir + "/config.txt").hash(), c.hash());
}

TEST(TrainOnline, RandomPhaseOnlyRunHasNoLearnerSteps) {
    const auto dir = fresh_dir("random_only");
    auto c = tiny_config();
    c.schedule.total_env_steps = c.schedule.initial_random_steps;
    const auto result = train_online(c, dir);
    EXPECT_EQ(result.learner_steps, 0);
    const auto run = load_run(result.checkpoint_path);
    EXPECT_EQ(run.learner_steps, 0);
    EXPECT_EQ(run.env_steps, c.schedule.initial_random_steps);
}

TEST(TrainOnline, SameSeedGivesIdenticalRuns) {
    const auto a = fresh_dir("same_a");
    const auto b = fresh_dir("same_b");
    train_online(tiny_config(), a);
    train_online(tiny_config(), b);
    EXPECT_EQ(read_file(a + "/metrics.jsonl"), read_file(b + "/metrics.jsonl"));
    EXPECT_EQ(read_file(a + "/checkpoint.bin"), read_file(b + "/checkpoint.bin"));
}

TEST(TrainOnline, ResumeReproducesTheUninterruptedRun) {
    for (Variant v : {Variant::nce, Variant::c_learning, Variant::model_based}) {
        const auto full = fresh_dir("resume_full");
        const auto split = fresh_dir("resume_split");
        const auto c = tiny_config(v);
        train_online(c, full);
        RunOptions stop;
        stop.stop_at = 600;
        const auto partial = train_online(c, split, stop);
        EXPECT_FALSE(partial.completed);
        RunOptions resume;
        resume.resume_from = partial.checkpoint_path;
        train_online(c, split, resume);
        EXPECT_EQ(read_file(full + "/metrics.jsonl"), read_file(split + "/metrics.jsonl")) << to_string(v);
        EXPECT_EQ(read_file(full + "/checkpoint.bin"), read_file(split + "/checkpoint.bin")) << to_string(v);
    }
}

TEST(TrainOnline, ResumeRejectsADifferentConfig) {
    const auto dir = fresh_dir("resume_mismatch");
    RunOptions stop;
    stop.stop_at = 400;
    const auto partial = train_online(tiny_config(), dir, stop);
    auto other = tiny_config();
    other.agent.learning_rate = 1e-2;
    RunOptions resume;
    resume.resume_from = partial.checkpoint_path;
    EXPECT_THROW(train_online(other, dir, resume), std::exception);
}

TEST(TrainOnline, InfiniteEpsilonFilterMatchesDisabledFilter) {
    const auto off = fresh_dir("filter_off");
    const auto inf = fresh_dir("filter_inf");
    auto c = tiny_config();
    const auto r_off = train_online(c, off);
    c.agent.filter_enabled = true;
    c.agent.filter_epsilon = std::numeric_limits<double>::infinity();
    const auto r_inf = train_online(c, inf);
    expect_same_records(without_filter_records(read_metrics(off + "/metrics.jsonl")),
                        without_filter_records(read_metrics(inf + "/metrics.jsonl")));
    const auto a = load_run(r_off.checkpoint_path);
    const auto b = load_run(r_inf.checkpoint_path);
    expect_same_params(a.agent.policy.params(), b.agent.policy.params());
    expect_same_params(a.agent.critics[0].sa_encoder.params(), b.agent.critics[0].sa_encoder.params());
    EXPECT_GT(r_inf.filter.considered, 0);
    EXPECT_EQ(r_inf.filter.kept, r_inf.filter.considered);
}

TEST(TrainOnline, SmallEpsilonRejectsRows) {
    const auto dir = fresh_dir("filter_small");
    auto c = tiny_config();
    c.agent.filter_enabled = true;
    c.agent.filter_epsilon = 1e-3;
    const auto r = train_online(c, dir);
    EXPECT_GT(r.filter.considered, 0);
    EXPECT_LT(r.filter.kept, r.filter.considered);
    EXPECT_EQ(r.filter.kept + r.filter.rejected, r.filter.considered);
}

TEST(TrainOnline, EveryVariantRuns) {
    for (Variant v : {Variant::cpc, Variant::nce_plus_c, Variant::gcbc}) {
        const auto dir = fresh_dir("variant");
        const auto r = train_online(tiny_config(v), dir);
        EXPECT_TRUE(r.completed) << to_string(v);
        EXPECT_GT(r.learner_steps, 0);
        const auto run = load_run(r.checkpoint_path);
        EXPECT_EQ(run.config.agent.variant, v);
    }
}

TEST(TrainOffline, LambdaOnePolicyMatchesGcbc) {
    const auto data = expert_dataset("lambda_one");
    auto c = tiny_config();
    c.offline.dataset = data;
    c.offline.lambda = 1.0;
    const auto nce_dir = fresh_dir("offline_nce");
    const auto gcbc_dir = fresh_dir("offline_gcbc");
    const auto r_nce = train_offline(c, nce_dir);
    c.agent.variant = Variant::gcbc;
    const auto r_gcbc = train_offline(c, gcbc_dir);
    const auto a = load_run(r_nce.checkpoint_path);
    const auto b = load_run(r_gcbc.checkpoint_path);
    expect_same_params(a.agent.policy.params(), b.agent.policy.params());
    std::vector<MetricsRecord> la, lb;
    for (const auto& r : read_metrics(nce_dir + "/metrics.jsonl"))
        if (r.name == "train/actor_loss") la.push_back(r);
    for (const auto& r : read_metrics(gcbc_dir + "/metrics.jsonl"))
        if (r.name == "train/actor_loss") lb.push_back(r);
    ASSERT_FALSE(la.empty());
    expect_same_records(la, lb);
}

TEST(TrainOffline, ResumeReproducesTheUninterruptedRun) {
    const auto data = expert_dataset("offline_resume");
    auto c = tiny_config();
    c.offline.dataset = data;
    c.schedule.eval_interval = 50;
    const auto full = fresh_dir("offline_full");
    const auto split = fresh_dir("offline_split");
    train_offline(c, full);
    RunOptions stop;
    stop.stop_at = 70;
    const auto partial = train_offline(c, split, stop);
    EXPECT_EQ(partial.learner_steps, 70);
    RunOptions resume;
    resume.resume_from = partial.checkpoint_path;
    train_offline(c, split, resume);
    EXPECT_EQ(read_file(full + "/metrics.jsonl"), read_file(split + "/metrics.jsonl"));
    EXPECT_EQ(read_file(full + "/checkpoint.bin"), read_file(split + "/checkpoint.bin"));
}

TEST(TrainOffline, RejectsMismatchedDatasetAndUnsupportedVariant) {
    const auto data = expert_dataset("mismatch");
    auto c = tiny_config();
    c.offline.dataset = data;
    c.agent.variant = Variant::cpc;
    EXPECT_THROW(train_offline(c, fresh_dir("offline_cpc")), ConfigError);

    Dataset d = load_dataset(data);
    d.observation_dim = 3;
    for (auto& t : d.trajectories) t.states.conservativeResize(Eigen::NoChange, 3);
    const std::string wide = data + ".wide";
    save_dataset(wide, d);
    c.agent.variant = Variant::nce;
    c.offline.dataset = wide;
    EXPECT_THROW(train_offline(c, fresh_dir("offline_wide")), ConfigError);
    c.offline.dataset.clear();
    EXPECT_THROW(train_offline(c, fresh_dir("offline_none")), ConfigError);
}

TEST(Evaluate, DeterministicAndIndependentOfWorkers) {
    const auto c = tiny_config();
    const PointMaze env = make_maze_env(c.env);
    const Agent agent(c.agent, env.spec(), 3);
    const Rng base(11);
    const auto a = evaluate_agent(agent, env, 12, base, 1);
    const auto b = evaluate_agent(agent, env, 12, base, 1);
    const auto d = evaluate_agent(agent, env, 12, base, 3);
    EXPECT_EQ(a.successes, b.successes);
    EXPECT_EQ(a.mean_final_distance, b.mean_final_distance);
    EXPECT_EQ(a.successes, d.successes);
    EXPECT_EQ(a.mean_final_distance, d.mean_final_distance);
    EXPECT_EQ(a.episodes, 12);
    EXPECT_NEAR(a.standard_error, std::sqrt(a.success_rate * (1 - a.success_rate) / 12.0), 1e-15);
}

TEST(Evaluate, GoalAtTheStartAlwaysSucceeds) {
    const PointMaze env(MazeLayout::parse("S\n"), PointMazeConfig{});
    const auto res = evaluate(env, random_action_fn(env.spec().action), 20, Rng(1));
    EXPECT_EQ(res.successes, 20);
    EXPECT_EQ(res.success_rate, 1.0);
    EXPECT_EQ(res.standard_error, 0.0);
}

TEST(Evaluate, RandomBaselineStaysInTheBox) {
    const PointMaze env = make_maze_env(tiny_config().env);
    Rng rng(2);
    const ActionFn act = random_action_fn(env.spec().action);
    for (int i = 0; i < 200; ++i) {
        const Vector a = act(Vector::Zero(2), Vector::Zero(2), rng);
        EXPECT_LE(a.cwiseAbs().maxCoeff(), env.spec().action.bound);
    }
    const auto res = evaluate(env, act, 30, Rng(4));
    EXPECT_GT(res.successes, 0);
    EXPECT_LT(res.successes, 30);
}

TEST(Expert, FollowsTheShortestPath) {
    PointMazeConfig pc;
    pc.max_episode_steps = 200;
    PointMaze env(MazeLayout::builtin("spiral11"), pc);
    const MazeExpert expert(env);
    const Cell start = env.layout().start_cells().front();
    Cell goal = start;
    int dist = 0;
    for (const Cell& c : env.layout().free_cells()) {
        const int d = *shortest_path_distance(env.layout(), start, c);
        if (d > dist) {
            dist = d;
            goal = c;
        }
    }
    ASSERT_GT(dist, 40);
    Rng rng(0);
    Vector obs = env.reset(env.cell_center(goal), rng);
    int steps = 0;
    while (!(env.cell_of(obs) == goal)) {
        obs = env.step(expert.act(obs, env.commanded_goal()), rng).observation;
        ASSERT_LE(++steps, dist);
    }
    EXPECT_EQ(steps, dist);
    EXPECT_TRUE(obs.isApprox(env.cell_center(goal)));
}

TEST(Expert, DatasetRoundTripsAndReachesGoals) {
    const auto c = tiny_config();
    const PointMaze maze = make_maze_env(c.env);
    Rng rng(5);
    const Dataset d = collect_expert_dataset(maze, 10, ExpertConfig{}, rng, "empty5");
    ASSERT_EQ(d.trajectories.size(), 10u);
    for (const auto& t : d.trajectories) {
        const Vector last = t.states.row(t.states.rows() - 1).transpose();
        EXPECT_LE((last - t.commanded_goal).norm(), maze.spec().success_radius);
    }
    const std::string path = (fs::temp_directory_path() / "crl_harness_expert.crld").string();
    save_dataset(path, d);
    const Dataset back = load_dataset(path);
    ASSERT_EQ(back.trajectories.size(), d.trajectories.size());
    for (std::size_t i = 0; i < d.trajectories.size(); ++i) {
        EXPECT_EQ(back.trajectories[i].states, d.trajectories[i].states);
        EXPECT_EQ(back.trajectories[i].actions, d.trajectories[i].actions);
    }
    EXPECT_EQ(back.sidecar.at("env"), "empty5");
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(CRL_BINARY) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run_cli("--help"), 0);
    EXPECT_EQ(run_cli(""), 1);
    EXPECT_EQ(run_cli("no-such-command"), 1);
    EXPECT_EQ(run_cli("train --config /nonexistent.txt --out /tmp/crl_cli_none"), 1);
    EXPECT_EQ(run_cli("oracle-check --env chain --gamma 0.9"), 0);

    const std::string bad = (fs::temp_directory_path() / "crl_cli_corrupt.bin").string();
    std::ofstream(bad) << "not a checkpoint";
    EXPECT_EQ(run_cli("eval --checkpoint " + bad), 2);
}

TEST(Cli, TrainThenEvalReproducesTheFinalEval) {
    const auto dir = fresh_dir("cli_train");
    const std::string cfg = dir + ".txt";
    std::ofstream(cfg) << tiny_config().to_text();
    ASSERT_EQ(run_cli("train --config " + cfg + " --out " + dir), 0);
    double final_rate = -1.0;
    for (const auto& r : read_metrics(dir + "/metrics.jsonl"))
        if (r.name == "eval/success_rate") final_rate = r.value;
    const auto run = load_run(dir + "/checkpoint.bin");
    const PointMaze env = make_maze_env(run.config.env);
    const auto res = evaluate_agent(run.agent, env, run.config.schedule.eval_episodes, TrainStreams(run.config.seed).eval);
    EXPECT_EQ(res.success_rate, final_rate);
    EXPECT_EQ(run_cli("eval --checkpoint " + dir + "/checkpoint.bin"), 0);
}

}  // namespace
}  // namespace crl
