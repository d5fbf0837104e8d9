#pragma once

#include <vector>

#include "crl/critic/contrastive_critic.hpp"

namespace crl {

struct SimilarityMatrix {
    /// Cosine similarity of d f / d s between goals; NaN in undefined rows.
    Matrix values;
    /// false where the gradient for that goal is exactly zero.
    std::vector<bool> defined;
    /// d f(probe_state, 0, g_i) / d s, one row per goal.
    Matrix gradients;

    /// Mean over off-diagonal entries whose rows and columns are defined.
    double mean_off_diagonal() const;
};

SimilarityMatrix gradient_similarity(const ContrastiveCritic& critic, const Vector& probe_state, const Matrix& goals);

}  // namespace crl
