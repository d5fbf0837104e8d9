#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "crl/analysis/export.hpp"
#include "crl/analysis/gradient_similarity.hpp"
#include "crl/analysis/probe.hpp"
#include "test_util.hpp"

namespace crl {
namespace {

ContrastiveCritic small_critic(std::uint64_t seed) {
    Rng rng(seed);
    Mlp sa({4, 16, 3}, rng);
    Mlp g({2, 16, 3}, rng);
    test::randomize_biases(sa, rng, 0.1);
    test::randomize_biases(g, rng, 0.1);
    return ContrastiveCritic(std::move(sa), std::move(g), ActionSpace{ActionKind::continuous, 2, 1.0}, 2);
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("crl_analysis_" + name)).string();
}

TEST(RidgeProbe, OneHotDistanceFeaturesAreRecoveredExactly) {
    // Each sample's feature vector is a one-hot of its distance value, and
    // every value appears in both splits, so a near-zero ridge fits exactly.
    const int levels = 4, per_level = 10;
    Matrix x = Matrix::Zero(levels * per_level, levels);
    Vector y(levels * per_level);
    for (int i = 0; i < levels * per_level; ++i) {
        x(i, i % levels) = 1.0;
        y(i) = static_cast<double>(i % levels);
    }
    const auto rep = ridge_probe(x, y, 1e-9, 3);
    EXPECT_EQ(rep.num_train + rep.num_test, levels * per_level);
    EXPECT_EQ(rep.num_train, 32);
    EXPECT_LT(rep.train_mse, 1e-10);
    EXPECT_LT(rep.test_mse, 1e-10);
}

TEST(RidgeProbe, HugeRidgePredictsTheTrainingMean) {
    Rng rng(5);
    const Matrix x = test::random_matrix(50, 3, rng);
    Vector y(50);
    for (int i = 0; i < 50; ++i) y(i) = 2.0 * x(i, 0) - x(i, 2) + 0.1 * rng.normal();
    const auto rep = ridge_probe(x, y, 1e12, 11);
    // With w -> 0 every prediction is the intercept (the training mean).
    EXPECT_LT(rep.weights.norm(), 1e-9);
    double all_sq = 0.0;
    for (int i = 0; i < 50; ++i) all_sq += (y(i) - rep.intercept) * (y(i) - rep.intercept);
    EXPECT_NEAR(rep.train_mse * rep.num_train + rep.test_mse * rep.num_test, all_sq, 1e-6);
}

TEST(RidgeProbe, SolutionSatisfiesTheNormalEquations) {
    Rng rng(8);
    const Matrix x = test::random_matrix(40, 5, rng);
    Vector y(40);
    for (int i = 0; i < 40; ++i) y(i) = x.row(i).sum() + rng.normal();
    const double ridge = 0.3;
    const auto rep = ridge_probe(x, y, ridge, 2);
    // Rebuild the seeded training split, then check that the gradient of
    // sum (x w + b - y)^2 + ridge ||w||^2 vanishes there.
    std::vector<Eigen::Index> perm(40);
    for (Eigen::Index i = 0; i < 40; ++i) perm[static_cast<std::size_t>(i)] = i;
    Rng shuffle(2);
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[shuffle.uniform_int(i)]);
    Matrix xt(rep.num_train, 5);
    Vector yt(rep.num_train);
    for (int i = 0; i < rep.num_train; ++i) {
        xt.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
        yt(i) = y(perm[static_cast<std::size_t>(i)]);
    }
    const Vector resid = (xt * rep.weights).array() + rep.intercept - yt.array();
    EXPECT_NEAR(resid.squaredNorm() / rep.num_train, rep.train_mse, 1e-10);
    EXPECT_LT(std::abs(resid.sum()), 1e-8);
    EXPECT_LT((xt.transpose() * resid + ridge * rep.weights).norm(), 1e-8);
}

TEST(RidgeProbe, RejectsBadArguments) {
    const Matrix x = Matrix::Ones(10, 2);
    const Vector y = Vector::Ones(10);
    EXPECT_THROW(ridge_probe(x, y, 0.0, 1), ConfigError);
    EXPECT_THROW(ridge_probe(x, y, -1.0, 1), ConfigError);
    EXPECT_THROW(ridge_probe(x, y, 1.0, 1, 1.0), ConfigError);
    EXPECT_THROW(ridge_probe(x, Vector::Ones(9), 1.0, 1), std::invalid_argument);
}

TEST(LinearProbe, UsesEveryReachableFreeCell) {
    const PointMaze maze(MazeLayout::builtin("nine_room"), PointMazeConfig{});
    const auto critic = small_critic(1);
    const auto goal = maze.layout().free_cells().back();
    const auto rep = linear_probe(critic, maze, goal, 1e-3, 0);
    EXPECT_EQ(rep.num_samples, static_cast<int>(maze.layout().free_cells().size()));
    EXPECT_EQ(rep.num_train, static_cast<int>(std::llround(0.8 * rep.num_samples)));
    EXPECT_EQ(rep.feature_source, "critic");
    EXPECT_TRUE(std::isfinite(rep.test_mse));
}

TEST(GradientSimilarity, SymmetricWithUnitDiagonal) {
    const auto critic = small_critic(2);
    Rng rng(3);
    const Matrix goals = test::random_matrix(6, 2, rng);
    const auto sim = gradient_similarity(critic, Vector::Constant(2, 0.3), goals);
    ASSERT_EQ(sim.values.rows(), 6);
    for (int i = 0; i < 6; ++i) {
        ASSERT_TRUE(sim.defined[static_cast<std::size_t>(i)]);
        EXPECT_DOUBLE_EQ(sim.values(i, i), 1.0);
        for (int j = 0; j < 6; ++j) {
            EXPECT_EQ(sim.values(i, j), sim.values(j, i));
            EXPECT_LE(std::abs(sim.values(i, j)), 1.0);
        }
    }
    EXPECT_TRUE(std::isfinite(sim.mean_off_diagonal()));
}

TEST(GradientSimilarity, GradientsMatchFiniteDifferences) {
    const auto critic = small_critic(4);
    Rng rng(6);
    const Matrix goals = test::random_matrix(3, 2, rng);
    const Vector probe = Vector::Constant(2, -0.2);
    const auto sim = gradient_similarity(critic, probe, goals);
    for (int i = 0; i < 3; ++i) {
        Matrix state = probe.transpose();
        const Vector goal = goals.row(i).transpose();
        const double err = test::input_rel_error(state, sim.gradients.row(i), [&] {
            return critic_value(critic, state.row(0).transpose(), Vector::Zero(2), goal);
        });
        EXPECT_LT(err, 1e-6);
    }
}

TEST(GradientSimilarity, IdenticalGoalsAreFullySimilar) {
    const auto critic = small_critic(5);
    Matrix goals(3, 2);
    goals << 0.4, -0.7, 0.4, -0.7, 0.4, -0.7;
    const auto sim = gradient_similarity(critic, Vector::Constant(2, 0.1), goals);
    EXPECT_NEAR(sim.values(0, 1), 1.0, 1e-12);
    EXPECT_NEAR(sim.values(1, 2), 1.0, 1e-12);
    EXPECT_NEAR(sim.mean_off_diagonal(), 1.0, 1e-12);
}

TEST(GradientSimilarity, ZeroCriticRowsAreUndefined) {
    const ContrastiveCritic critic(Mlp::zeros({4, 8, 3}), Mlp::zeros({2, 8, 3}),
                                   ActionSpace{ActionKind::continuous, 2, 1.0}, 2);
    const auto sim = gradient_similarity(critic, Vector::Zero(2), Matrix::Ones(3, 2));
    for (bool d : sim.defined) EXPECT_FALSE(d);
    EXPECT_TRUE(std::isnan(sim.values(0, 0)));
    EXPECT_TRUE(std::isnan(sim.mean_off_diagonal()));
}

TEST(GradientSimilarity, RejectsWrongShapes) {
    const auto critic = small_critic(6);
    EXPECT_THROW(gradient_similarity(critic, Vector::Zero(3), Matrix::Ones(2, 2)), ShapeError);
    EXPECT_THROW(gradient_similarity(critic, Vector::Zero(2), Matrix::Ones(2, 3)), ShapeError);
}

TEST(Export, EmptyTableWritesHeaderOnly) {
    const auto path = temp_path("empty.csv");
    const auto critic = small_critic(7);
    write_representation_csv(path, goal_representations(critic, Matrix(0, 2)));
    std::ifstream in(path);
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) ++lines;
    EXPECT_EQ(lines, 1);
    const auto table = read_representation_csv(path);
    EXPECT_TRUE(table.ids.empty());
    EXPECT_EQ(table.representations.rows(), 0);
    std::filesystem::remove(path);
}

TEST(Export, RoundTripIsExactAndMatchesTheCritic) {
    const auto critic = small_critic(8);
    Rng rng(9);
    const Matrix states = test::random_matrix(5, 2, rng);
    const Matrix actions = test::random_matrix(5, 2, rng, 0.5);
    const Matrix goals = test::random_matrix(5, 2, rng);
    const auto sa_path = temp_path("sa.csv");
    const auto g_path = temp_path("g.csv");
    write_representation_csv(sa_path, sa_representations(critic, states, actions));
    write_representation_csv(g_path, goal_representations(critic, goals));
    const auto sa = read_representation_csv(sa_path);
    const auto g = read_representation_csv(g_path);
    ASSERT_EQ(sa.ids.size(), 5u);
    EXPECT_EQ(sa.coordinates.leftCols(2), states);
    EXPECT_EQ(sa.coordinates.rightCols(2), actions);
    EXPECT_EQ(g.coordinates, goals);
    EXPECT_EQ(sa.representations, critic.sa_repr(states, actions));
    for (int i = 0; i < 5; ++i) {
        const double f = critic_value(critic, states.row(i).transpose(), actions.row(i).transpose(),
                                      goals.row(i).transpose());
        EXPECT_NEAR(sa.representations.row(i).dot(g.representations.row(i)), f, 1e-9);
    }
    std::filesystem::remove(sa_path);
    std::filesystem::remove(g_path);
}

TEST(Export, MissingFileThrows) {
    EXPECT_THROW(read_representation_csv(temp_path("does_not_exist.csv")), std::runtime_error);
}

}  // namespace
}  // namespace crl
