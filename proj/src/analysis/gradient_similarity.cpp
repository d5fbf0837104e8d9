#include "crl/analysis/gradient_similarity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crl/analysis/probe.hpp"

namespace crl {

double SimilarityMatrix::mean_off_diagonal() const {
    double sum = 0.0;
    long count = 0;
    for (Eigen::Index i = 0; i < values.rows(); ++i)
        for (Eigen::Index j = 0; j < values.cols(); ++j) {
            if (i == j || !defined[static_cast<std::size_t>(i)] || !defined[static_cast<std::size_t>(j)]) continue;
            sum += values(i, j);
            ++count;
        }
    return count == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(count);
}

SimilarityMatrix gradient_similarity(const ContrastiveCritic& critic, const Vector& probe_state, const Matrix& goals) {
    if (probe_state.size() != critic.obs_dim()) throw ShapeError("gradient_similarity: probe state size");
    require_cols(goals, critic.goal_dim(), "gradient_similarity goals");
    const auto n = goals.rows();
    const Matrix states = probe_state.transpose().replicate(n, 1);
    Mlp::Tape tape;
    critic.sa_encoder.forward(critic.sa_input(states, probe_actions(critic.action_space(), n)), tape);
    // d <phi(s, a), psi(g)> / d s = J_phi(s)^T psi(g)
    const Matrix upstream = critic.g_repr(goals);
    SimilarityMatrix out;
    out.gradients = critic.sa_encoder.backward(tape, upstream).input.leftCols(critic.obs_dim());

    const Vector norms = out.gradients.rowwise().norm();
    out.defined.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) out.defined[static_cast<std::size_t>(i)] = norms(i) > 0.0;
    out.values = Matrix::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!out.defined[static_cast<std::size_t>(i)]) continue;
        out.values(i, i) = 1.0;
        for (Eigen::Index j = 0; j < i; ++j) {
            if (!out.defined[static_cast<std::size_t>(j)]) continue;
            const double c = std::clamp(out.gradients.row(i).dot(out.gradients.row(j)) / (norms(i) * norms(j)), -1.0, 1.0);
            out.values(i, j) = c;
            out.values(j, i) = c;
        }
    }
    return out;
}

}  // namespace crl
