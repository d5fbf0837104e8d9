#include <gtest/gtest.h>

#include <cmath>

#include "crl/critic/contrastive_critic.hpp"
#include "crl/critic/critic_losses.hpp"
#include "crl/critic/table_critic.hpp"
#include "crl/numcore/losses.hpp"
#include "crl/oracle/occupancy.hpp"
#include "test_util.hpp"

using namespace crl;

namespace {

constexpr ActionSpace kBox{ActionKind::continuous, 2, 1.0};
constexpr ActionSpace kDiscrete{ActionKind::discrete, 3, 0.0};

struct Fixture {
    ContrastiveCritic critic;
    Matrix states, actions, goals, next_states, next_actions, random_goals;
};

Matrix random_actions(const ActionSpace& space, Eigen::Index rows, Rng& rng) {
    if (space.kind == ActionKind::continuous) return test::random_matrix(rows, space.size, rng, 0.5);
    Matrix a(rows, 1);
    for (Eigen::Index i = 0; i < rows; ++i) a(i, 0) = static_cast<double>(rng.uniform_int(space.size));
    return a;
}

Fixture make_fixture(const ActionSpace& space, Eigen::Index b, std::uint64_t seed) {
    Rng rng(seed);
    Fixture f;
    f.critic = ContrastiveCritic(3, 2, space, {8, 8}, 4, rng);
    test::randomize_biases(f.critic.sa_encoder, rng);
    test::randomize_biases(f.critic.g_encoder, rng);
    f.states = test::random_matrix(b, 3, rng);
    f.actions = random_actions(space, b, rng);
    f.goals = test::random_matrix(b, 2, rng);
    f.next_states = test::random_matrix(b, 3, rng);
    f.next_actions = random_actions(space, b, rng);
    f.random_goals = test::random_matrix(b, 2, rng);
    return f;
}

ContrastiveCritic zero_critic(const ActionSpace& space) {
    return ContrastiveCritic(Mlp::zeros({3 + space.encoded_dim(), 4}), Mlp::zeros({2, 4}), space, 3);
}

double critic_fd_error(ContrastiveCritic& critic, const CriticGrads& grads, const std::function<double()>& loss) {
    ParamList params = critic.sa_encoder.params();
    params.insert(params.end(), critic.g_encoder.params().begin(), critic.g_encoder.params().end());
    ParamList all = grads.sa;
    all.insert(all.end(), grads.g.begin(), grads.g.end());
    const std::size_t n_sa = critic.sa_encoder.params().size();
    return test::gradient_rel_error(params, all, [&] {
        for (std::size_t i = 0; i < n_sa; ++i) critic.sa_encoder.params()[i] = params[i];
        for (std::size_t i = n_sa; i < params.size(); ++i) critic.g_encoder.params()[i - n_sa] = params[i];
        return loss();
    });
}

}  // namespace

TEST(ContrastiveCritic, ValueIsInnerProduct) {
    Fixture f = make_fixture(kBox, 5, 1);
    const Matrix logits = logits_matrix(f.critic, f.states, f.actions, f.goals);
    const Matrix phi = f.critic.sa_repr(f.states, f.actions);
    const Matrix psi = f.critic.g_repr(f.goals);
    EXPECT_LT((logits - phi * psi.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    const Vector diag = critic_values(f.critic, f.states, f.actions, f.goals);
    EXPECT_LT((diag - logits.diagonal()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(critic_value(f.critic, f.states.row(2).transpose(), f.actions.row(2).transpose(),
                             f.goals.row(2).transpose()),
                diag(2), 1e-12);
}

TEST(ContrastiveCritic, DiscreteActionsAreOneHot) {
    Fixture f = make_fixture(kDiscrete, 3, 2);
    Matrix a(1, 1);
    a << 2;
    const Matrix in = f.critic.sa_input(f.states.topRows(1), a);
    EXPECT_EQ(in.cols(), 6);
    EXPECT_EQ(in(0, 3), 0.0);
    EXPECT_EQ(in(0, 5), 1.0);
}

TEST(NceLoss, ZeroCriticGivesLn2) {
    Fixture f = make_fixture(kBox, 6, 3);
    const ContrastiveCritic z = zero_critic(kBox);
    EXPECT_NEAR(nce_loss(z, f.states, f.actions, f.goals).loss, std::log(2.0), 1e-12);
}

TEST(NceLoss, MatchesDirectFormula) {
    Fixture f = make_fixture(kBox, 6, 4);
    const Matrix l = logits_matrix(f.critic, f.states, f.actions, f.goals);
    double direct = 0.0;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
            const double p = 1.0 / (1.0 + std::exp(-l(i, j)));
            direct -= i == j ? std::log(p) : std::log(1.0 - p);
        }
    EXPECT_NEAR(nce_loss(f.critic, f.states, f.actions, f.goals).loss, direct / 36.0, 1e-12);
}

TEST(NceLoss, RequiresTwoRows) {
    Fixture f = make_fixture(kBox, 1, 5);
    EXPECT_THROW(nce_loss(f.critic, f.states, f.actions, f.goals), ShapeError);
}

TEST(CpcLoss, ZeroCriticClosedForm) {
    for (int b : {2, 5, 16}) {
        Fixture f = make_fixture(kBox, b, 6);
        const ContrastiveCritic z = zero_critic(kBox);
        const double lb = std::log(static_cast<double>(b));
        EXPECT_NEAR(cpc_loss(z, f.states, f.actions, f.goals, 1e-2).loss, lb + 1e-2 * lb * lb, 1e-10);
    }
}

TEST(CpcLoss, MatchesDirectFormula) {
    Fixture f = make_fixture(kBox, 5, 7);
    const Matrix l = logits_matrix(f.critic, f.states, f.actions, f.goals);
    double ce = 0.0, reg = 0.0;
    for (int i = 0; i < 5; ++i) {
        double z = 0.0;
        for (int j = 0; j < 5; ++j) z += std::exp(l(i, j));
        ce -= l(i, i) - std::log(z);
        reg += std::log(z) * std::log(z);
    }
    EXPECT_NEAR(cpc_loss(f.critic, f.states, f.actions, f.goals, 0.3).loss, ce / 5 + 0.3 * reg / 5, 1e-10);
}

TEST(CLearning, MatchesDirectFormula) {
    Fixture f = make_fixture(kBox, 7, 8);
    const double gamma = 0.8, clip = 1.5;
    const TdInputs in{f.states, f.actions, f.next_states, f.next_actions, f.random_goals};
    const Vector w_raw = critic_values(f.critic, f.next_states, f.next_actions, f.random_goals);
    const Vector f_next = critic_values(f.critic, f.states, f.actions, f.next_states.leftCols(2));
    const Vector f_goal = critic_values(f.critic, f.states, f.actions, f.random_goals);
    double direct = 0.0;
    for (int i = 0; i < 7; ++i) {
        const double w = std::min(std::exp(w_raw(i)), clip);
        direct -= (1 - gamma) * log_sigmoid(f_next(i)) + gamma * w * log_sigmoid(f_goal(i)) + log_sigmoid(-f_goal(i));
    }
    EXPECT_NEAR(c_learning_loss(f.critic, in, gamma, clip).loss, direct / 7, 1e-12);
    EXPECT_THROW(c_learning_loss(f.critic, in, 1.0, clip), ConfigError);
    EXPECT_THROW(c_learning_loss(f.critic, in, gamma, 0.0), ConfigError);
}

TEST(NcePlusC, EqualsSumOfComponentTerms) {
    Fixture f = make_fixture(kBox, 9, 9);
    const double gamma = 0.7;
    const TdInputs in{f.states, f.actions, f.next_states, f.next_actions, f.random_goals};
    NcePlusCTerms terms;
    const double total = nce_plus_c_loss(f.critic, in, f.goals, gamma, 20.0, &terms).loss;

    const Vector fp = critic_values(f.critic, f.states, f.actions, f.goals);
    const Vector fg = critic_values(f.critic, f.states, f.actions, f.random_goals);
    const Vector fw = critic_values(f.critic, f.next_states, f.next_actions, f.random_goals);
    double pos = 0.0, td = 0.0, neg = 0.0;
    for (int i = 0; i < 9; ++i) {
        pos += log_sigmoid(fp(i));
        td += std::min(std::exp(fw(i)), 20.0) * log_sigmoid(fg(i));
        neg += log_sigmoid(-fg(i));
    }
    pos /= 9, td /= 9, neg /= 9;
    EXPECT_NEAR(terms.positive, pos, 1e-12);
    EXPECT_NEAR(terms.td, td, 1e-12);
    EXPECT_NEAR(terms.negative, neg, 1e-12);
    EXPECT_NEAR(total, -((2 - gamma) * pos + gamma * td + 2 * neg), 1e-10);
}

class CriticGradient : public ::testing::TestWithParam<ActionSpace> {};

TEST_P(CriticGradient, NceMatchesFiniteDifferences) {
    Fixture f = make_fixture(GetParam(), 6, 10);
    const CriticLoss l = nce_loss(f.critic, f.states, f.actions, f.goals);
    EXPECT_LT(critic_fd_error(f.critic, l.grads, [&] { return nce_loss(f.critic, f.states, f.actions, f.goals).loss; }),
              1e-5);
}

TEST_P(CriticGradient, CpcMatchesFiniteDifferences) {
    Fixture f = make_fixture(GetParam(), 6, 11);
    const CriticLoss l = cpc_loss(f.critic, f.states, f.actions, f.goals, 1e-2);
    EXPECT_LT(critic_fd_error(f.critic, l.grads,
                              [&] { return cpc_loss(f.critic, f.states, f.actions, f.goals, 1e-2).loss; }),
              1e-5);
}

TEST_P(CriticGradient, CLearningMatchesFiniteDifferencesWithFrozenWeight) {
    Fixture f = make_fixture(GetParam(), 6, 12);
    const double gamma = 0.9;
    const TdInputs in{f.states, f.actions, f.next_states, f.next_actions, f.random_goals};
    const CriticLoss l = c_learning_loss(f.critic, in, gamma, 20.0);
    // The bootstrap weight is a constant of the gradient, so the oracle
    // freezes it at the unperturbed parameters.
    Vector w = critic_values(f.critic, f.next_states, f.next_actions, f.random_goals);
    for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = std::min(std::exp(w(i)), 20.0);
    auto frozen = [&] {
        const Vector fn = critic_values(f.critic, f.states, f.actions, f.next_states.leftCols(2));
        const Vector fg = critic_values(f.critic, f.states, f.actions, f.random_goals);
        double s = 0.0;
        for (Eigen::Index i = 0; i < fn.size(); ++i)
            s -= (1 - gamma) * log_sigmoid(fn(i)) + gamma * w(i) * log_sigmoid(fg(i)) + log_sigmoid(-fg(i));
        return s / static_cast<double>(fn.size());
    };
    EXPECT_LT(critic_fd_error(f.critic, l.grads, frozen), 1e-5);
}

TEST_P(CriticGradient, NcePlusCMatchesFiniteDifferencesWithFrozenWeight) {
    Fixture f = make_fixture(GetParam(), 6, 13);
    const double gamma = 0.6;
    const TdInputs in{f.states, f.actions, f.next_states, f.next_actions, f.random_goals};
    const CriticLoss l = nce_plus_c_loss(f.critic, in, f.goals, gamma, 20.0);
    Vector w = critic_values(f.critic, f.next_states, f.next_actions, f.random_goals);
    for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = std::min(std::exp(w(i)), 20.0);
    auto frozen = [&] {
        const Vector fp = critic_values(f.critic, f.states, f.actions, f.goals);
        const Vector fg = critic_values(f.critic, f.states, f.actions, f.random_goals);
        double s = 0.0;
        for (Eigen::Index i = 0; i < fp.size(); ++i)
            s -= (2 - gamma) * log_sigmoid(fp(i)) + gamma * w(i) * log_sigmoid(fg(i)) + 2 * log_sigmoid(-fg(i));
        return s / static_cast<double>(fp.size());
    };
    EXPECT_LT(critic_fd_error(f.critic, l.grads, frozen), 1e-5);
}

INSTANTIATE_TEST_SUITE_P(ActionKinds, CriticGradient, ::testing::Values(kBox, kDiscrete));

TEST(TableCritic, NceExpectedLossGradient) {
    Rng rng(14);
    const TabularMDP mdp = random_tabular_mdp(rng, 4, 2, 0.8);
    const OccupancyTable occ = exact_occupancy(mdp, TabularPolicy::random(rng, 4, 2), 0.8);
    TableCritic critic(4, 2);
    critic.values = test::random_matrix(8, 4, rng);
    const Vector sa = Vector::Constant(8, 1.0 / 8);
    const TableLoss l = nce_expected_loss(critic, occ.matched(), sa, mdp.goal_distribution);
    ParamList params{critic.values};
    EXPECT_LT(test::gradient_rel_error(params, {l.grad}, [&] {
                  critic.values = params[0];
                  return nce_expected_loss(critic, occ.matched(), sa, mdp.goal_distribution).loss;
              }),
              1e-7);
}

TEST(TableCritic, CLearningFixedPointIsLogOccupancyRatio) {
    Rng rng(15);
    const TabularMDP mdp = random_tabular_mdp(rng, 5, 2, 0.7);
    const TabularPolicy policy = TabularPolicy::random(rng, 5, 2);
    const Matrix m = exact_occupancy(mdp, policy, 0.7).matched();
    const Vector pg = mdp.goal_distribution;
    const Vector sa = Vector::Constant(10, 0.1);
    TableCritic critic(5, 2);
    // With the bootstrap weight held fixed, the loss is minimized entrywise at
    // sigma(f) = pos / (pos + neg); iterating that map is a contraction.
    for (int it = 0; it < 400; ++it) {
        const TableLoss l = c_learning_expected_loss(critic, mdp, policy, sa, pg);
        // grad = -w (pos (1 - s) - neg s) with neg = p_g, so pos = -grad / w + p_g s ... solve for pos.
        Matrix next = critic.values;
        for (int r = 0; r < 10; ++r)
            for (int g = 0; g < 5; ++g) {
                const double s = sigmoid(critic.values(r, g));
                const double pos = (-l.grad(r, g) / sa(r) + pg(g) * s) / (1.0 - s);
                next(r, g) = std::log(pos / pg(g));
            }
        critic.values = next;
    }
    for (int r = 0; r < 10; ++r)
        for (int g = 0; g < 5; ++g) EXPECT_NEAR(critic.values(r, g), std::log(m(r, g) / pg(g)), 1e-9);
}

TEST(TableCritic, NcePlusCStationaryAtBayesOptimum) {
    Rng rng(16);
    const TabularMDP mdp = random_tabular_mdp(rng, 4, 3, 0.9);
    const TabularPolicy policy = TabularPolicy::random(rng, 4, 3);
    const Matrix m = exact_occupancy(mdp, policy, 0.9).matched();
    const TableCritic opt = bayes_optimal_critic(m, 3, mdp.goal_distribution);
    const TableLoss l = nce_plus_c_expected_loss(opt, mdp, policy, m, Vector::Constant(12, 1.0 / 12),
                                                 mdp.goal_distribution);
    EXPECT_LT(l.grad.cwiseAbs().maxCoeff(), 1e-12);
    const TableLoss c = c_learning_expected_loss(opt, mdp, policy, Vector::Constant(12, 1.0 / 12),
                                                 mdp.goal_distribution);
    EXPECT_LT(c.grad.cwiseAbs().maxCoeff(), 1e-12);
    const TableLoss n = nce_expected_loss(opt, m, Vector::Constant(12, 1.0 / 12), mdp.goal_distribution);
    EXPECT_LT(n.grad.cwiseAbs().maxCoeff(), 1e-12);
}
