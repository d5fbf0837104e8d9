#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "crl/analysis/export.hpp"
#include "crl/analysis/gradient_similarity.hpp"
#include "crl/analysis/probe.hpp"
#include "crl/harness/expert.hpp"
#include "crl/harness/train.hpp"
#include "crl/oracle/audit.hpp"
#include "crl/oracle/occupancy.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace crl;

namespace {

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    ExperimentConfig config = ExperimentConfig::load(path);
    for (const auto& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        config.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    const auto problems = config.problems();
    if (!problems.empty()) {
        std::string msg = "invalid config:";
        for (const auto& p : problems) msg += "\n  " + p;
        throw ConfigError(msg);
    }
    return config;
}

json eval_json(const EvalResult& e) {
    return json{{"episodes", e.episodes},
                {"successes", e.successes},
                {"success_rate", e.success_rate},
                {"standard_error", e.standard_error},
                {"mean_final_distance", e.mean_final_distance}};
}

json probe_json(const ProbeReport& r) {
    return json{{"feature_source", r.feature_source}, {"train_mse", r.train_mse},   {"test_mse", r.test_mse},
                {"ridge_coefficient", r.ridge_coefficient}, {"num_samples", r.num_samples},
                {"num_train", r.num_train},           {"num_test", r.num_test}};
}

const ContrastiveCritic& first_critic(const LoadedRun& run) {
    if (run.agent.critics.empty())
        throw ConfigError("variant '" + to_string(run.config.agent.variant) + "' has no contrastive critic");
    return run.agent.critics.front();
}

PointMaze env_for(const LoadedRun& run, const std::string& env_override) {
    EnvConfig env = run.config.env;
    if (!env_override.empty()) env.name = env_override;
    return make_maze_env(env);
}

void print_result(const RunResult& r) {
    json out{{"env_steps", r.env_steps},
             {"learner_steps", r.learner_steps},
             {"completed", r.completed},
             {"checkpoint", r.checkpoint_path},
             {"final_eval", eval_json(r.final_eval)}};
    std::cout << out.dump(2) << "\n";
}

TabularMDP oracle_env(const std::string& name, double gamma, Rng& rng) {
    if (name == "chain") return chain_mdp(8, gamma);
    if (name == "random") return random_tabular_mdp(rng, 6, 3, gamma);
    return grid_surrogate(MazeLayout::builtin(name), gamma);
}

// Checks the exact oracle identities on one MDP and policy family.
bool oracle_check(const std::string& name, double gamma, std::uint64_t seed, int policies, const std::string& report) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("--gamma must be in (0, 1)");
    Rng rng(seed);
    const TabularMDP mdp = oracle_env(name, gamma, rng);
    json cases = json::array();
    bool all = true;
    auto record = [&](const std::string& identity, int instance, double value, double tolerance, bool ok) {
        all = all && ok;
        cases.push_back({{"identity", identity},
                         {"policy", instance},
                         {"value", value},
                         {"tolerance", tolerance},
                         {"passed", ok}});
        std::printf("%s %-22s policy=%d value=%.3e tol=%.1e\n", ok ? "PASS" : "FAIL", identity.c_str(), instance,
                    value, tolerance);
    };
    for (int i = 0; i < policies; ++i) {
        const TabularPolicy policy = i == 0 ? TabularPolicy::uniform(mdp.num_states, mdp.num_actions)
                                            : TabularPolicy::random(rng, mdp.num_states, mdp.num_actions);
        const OccupancyTable occ = exact_occupancy(mdp, policy, gamma);
        const ExactQ q = exact_q(mdp, policy, gamma);
        const Matrix matched = occ.matched();

        double row_err = 0.0;
        for (const Matrix& m : occ.by_goal)
            row_err = std::max(row_err, ((m.rowwise().sum().array() - 1.0).abs().maxCoeff()));
        record("occupancy_rows", i, row_err, 1e-10, row_err <= 1e-10);

        const double q_err = (matched - q.values).cwiseAbs().maxCoeff();
        record("occupancy_equals_q", i, q_err, 1e-10, q_err <= 1e-10);

        const TableCritic critic = bayes_optimal_critic(matched, mdp.num_actions, mdp.goal_distribution);
        double f_err = 0.0;
        for (int s = 0; s < mdp.num_states; ++s)
            for (int a = 0; a < mdp.num_actions; ++a)
                for (int g = 0; g < mdp.num_states; ++g) {
                    const double f = critic(s, a, g);
                    const double back = std::isinf(f) ? 0.0 : std::exp(f) * mdp.goal_distribution[g];
                    f_err = std::max(f_err, std::abs(back - q(s, a, g)));
                }
        record("critic_times_marginal", i, f_err, 1e-10, f_err <= 1e-10);

        const AuditReport exact = policy_improvement_audit(mdp, policy, gamma, AuditCritic::per_goal);
        record("improvement_exact", i, exact.min_improvement, 0.0, exact.passed);
        const AuditReport avg = policy_improvement_audit(mdp, policy, gamma, AuditCritic::averaged);
        record("improvement_averaged", i, avg.min_improvement - avg.bound, 0.0, avg.passed);
    }
    json out{{"env", name},   {"gamma", gamma},     {"seed", seed},
             {"states", mdp.num_states}, {"actions", mdp.num_actions}, {"passed", all}, {"cases", cases}};
    if (!report.empty()) {
        std::ofstream f(report);
        if (!f) throw std::runtime_error("cannot write report '" + report + "'");
        f << out.dump(2) << "\n";
    }
    std::printf("%s oracle-check %s gamma=%g\n", all ? "PASS" : "FAIL", name.c_str(), gamma);
    return all;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Goal-conditioned contrastive RL lab"};
    app.require_subcommand(1);

    std::string config_path, out_dir, resume, dataset, checkpoint, env_name, report;
    std::vector<std::string> overrides;
    long long stop_at = -1;

    auto* train = app.add_subcommand("train", "Online training run");
    train->add_option("--config", config_path, "Config file")->required();
    train->add_option("--out", out_dir, "Run directory")->required();
    train->add_option("--set", overrides, "Override a config key (key=value)");
    train->add_option("--resume", resume, "Resume from a checkpoint");
    train->add_option("--stop-at", stop_at, "Checkpoint and stop once this many env steps are done");

    auto* offline = app.add_subcommand("train-offline", "Offline training on a fixed dataset");
    offline->add_option("--config", config_path, "Config file")->required();
    offline->add_option("--dataset", dataset, "Dataset file (overrides offline.dataset)");
    offline->add_option("--out", out_dir, "Run directory")->required();
    offline->add_option("--set", overrides, "Override a config key (key=value)");
    offline->add_option("--resume", resume, "Resume from a checkpoint");
    offline->add_option("--stop-at", stop_at, "Checkpoint and stop once this many learner steps are done");

    int episodes = -1;
    int workers = 1;
    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
    eval->add_option("--checkpoint", checkpoint)->required();
    eval->add_option("--episodes", episodes, "Episodes (default: schedule.eval_episodes)");
    eval->add_option("--workers", workers, "Rollout threads");
    eval->add_option("--env", env_name, "Evaluate on another maze");

    double gamma = 0.9;
    std::uint64_t seed = 0;
    int policies = 5;
    auto* oracle = app.add_subcommand("oracle-check", "Exact tabular identities");
    oracle->add_option("--env", env_name, "chain, random, or a builtin maze surrogate")->required();
    oracle->add_option("--gamma", gamma)->required();
    oracle->add_option("--seed", seed);
    oracle->add_option("--policies", policies, "Policies to check (the first is uniform)");
    oracle->add_option("--report", report, "JSON report path");

    double ridge = 1e-3;
    int goal_row = -1, goal_col = -1;
    auto* probe = app.add_subcommand("probe", "Linear probe of critic features against maze distance");
    probe->add_option("--checkpoint", checkpoint)->required();
    probe->add_option("--env", env_name, "Maze (default: the run's env)");
    probe->add_option("--ridge", ridge);
    probe->add_option("--seed", seed, "Split seed");
    probe->add_option("--goal-row", goal_row);
    probe->add_option("--goal-col", goal_col);

    auto* export_repr = app.add_subcommand("export-repr", "Export representations of every free cell center");
    export_repr->add_option("--checkpoint", checkpoint)->required();
    export_repr->add_option("--out", out_dir, "Output directory")->required();
    export_repr->add_option("--env", env_name, "Maze (default: the run's env)");

    int dataset_episodes = 200;
    double noise_std = 0.0, random_prob = 0.0;
    auto* collect = app.add_subcommand("collect-dataset", "Roll out the scripted maze expert");
    collect->add_option("--config", config_path, "Config file (env section is used)")->required();
    collect->add_option("--out", dataset, "Dataset path")->required();
    collect->add_option("--set", overrides, "Override a config key (key=value)");
    collect->add_option("--episodes", dataset_episodes);
    collect->add_option("--noise-std", noise_std);
    collect->add_option("--random-prob", random_prob);
    collect->add_option("--seed", seed);

    auto* grad_sim = app.add_subcommand("grad-sim", "Cosine similarity of critic state-gradients across goals");
    grad_sim->add_option("--checkpoint", checkpoint)->required();
    grad_sim->add_option("--out", out_dir, "CSV path")->required();
    grad_sim->add_option("--env", env_name, "Maze (default: the run's env)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        RunOptions options;
        options.resume_from = resume;
        options.stop_at = stop_at;
        if (train->parsed()) {
            const ExperimentConfig config = load_config(config_path, overrides);
            print_result(train_online(config, out_dir, options));
        } else if (offline->parsed()) {
            if (!dataset.empty()) overrides.push_back("offline.dataset=" + dataset);
            const ExperimentConfig config = load_config(config_path, overrides);
            print_result(train_offline(config, out_dir, options));
        } else if (eval->parsed()) {
            const LoadedRun run = load_run(checkpoint);
            const PointMaze env = env_for(run, env_name);
            const int n = episodes > 0 ? episodes : run.config.schedule.eval_episodes;
            const EvalResult r = evaluate_agent(run.agent, env, n, TrainStreams(run.config.seed).eval, workers);
            std::cout << eval_json(r).dump(2) << "\n";
        } else if (oracle->parsed()) {
            return oracle_check(env_name, gamma, seed, policies, report) ? 0 : 2;
        } else if (probe->parsed()) {
            const LoadedRun run = load_run(checkpoint);
            const PointMaze env = env_for(run, env_name);
            const auto& cells = env.layout().free_cells();
            const Cell goal = goal_row >= 0 ? Cell{goal_row, goal_col} : cells.back();
            const Agent fresh(run.config.agent, env.spec(), run.config.seed);
            const ProbeReport trained = linear_probe(first_critic(run), env, goal, ridge, seed, "trained");
            const ProbeReport random = linear_probe(fresh.critics.front(), env, goal, ridge, seed, "random_init");
            json out{{"goal", {goal.row, goal.col}},
                     {"units", "cells"},
                     {"trained", probe_json(trained)},
                     {"random_init", probe_json(random)}};
            std::cout << out.dump(2) << "\n";
        } else if (export_repr->parsed()) {
            const LoadedRun run = load_run(checkpoint);
            const PointMaze env = env_for(run, env_name);
            const ContrastiveCritic& critic = first_critic(run);
            const auto& cells = env.layout().free_cells();
            Matrix states(static_cast<Eigen::Index>(cells.size()), env.spec().observation_dim);
            for (std::size_t i = 0; i < cells.size(); ++i)
                states.row(static_cast<Eigen::Index>(i)) = env.cell_center(cells[i]).transpose();
            fs::create_directories(out_dir);
            write_representation_csv((fs::path(out_dir) / "sa_repr.csv").string(),
                                     sa_representations(critic, states, probe_actions(critic.action_space(), states.rows())));
            write_representation_csv((fs::path(out_dir) / "goal_repr.csv").string(),
                                     goal_representations(critic, states.leftCols(env.spec().goal_dim)));
            std::printf("wrote %zu rows to %s\n", cells.size(), out_dir.c_str());
        } else if (collect->parsed()) {
            const ExperimentConfig config = load_config(config_path, overrides);
            const PointMaze env = make_maze_env(config.env);
            Rng rng(seed);
            const Dataset ds =
                collect_expert_dataset(env, dataset_episodes, ExpertConfig{noise_std, random_prob}, rng, config.env.name);
            save_dataset(dataset, ds);
            std::printf("wrote %zu trajectories (%lld transitions) to %s\n", ds.trajectories.size(),
                        static_cast<long long>(ds.num_transitions()), dataset.c_str());
        } else if (grad_sim->parsed()) {
            const LoadedRun run = load_run(checkpoint);
            const PointMaze env = env_for(run, env_name);
            const auto& cells = env.layout().free_cells();
            Matrix goals(static_cast<Eigen::Index>(cells.size()), env.spec().goal_dim);
            for (std::size_t i = 0; i < cells.size(); ++i)
                goals.row(static_cast<Eigen::Index>(i)) = env.cell_center(cells[i]).transpose();
            const SimilarityMatrix sim = gradient_similarity(first_critic(run), env.cell_center(cells.front()), goals);
            std::ofstream f(out_dir);
            if (!f) throw std::runtime_error("cannot write '" + out_dir + "'");
            for (Eigen::Index j = 0; j < sim.values.cols(); ++j) f << (j ? "," : "") << "g" << j;
            f << "\n";
            char buf[32];
            for (Eigen::Index i = 0; i < sim.values.rows(); ++i) {
                for (Eigen::Index j = 0; j < sim.values.cols(); ++j) {
                    std::snprintf(buf, sizeof buf, "%.17g", sim.values(i, j));
                    f << (j ? "," : "") << buf;
                }
                f << "\n";
            }
            std::printf("mean off-diagonal similarity %.6f\n", sim.mean_off_diagonal());
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
