#pragma once

#include <span>

#include "crl/numcore/types.hpp"

namespace crl {

struct LossAndGrad {
    double loss = 0.0;
    Matrix grad;  // d loss / d input, same shape as the input
};

/// log(1 + exp(x)) without overflow.
double softplus(double x);
/// log sigma(x) = -softplus(-x).
double log_sigmoid(double x);
double sigmoid(double x);

/// Mean over all entries of the binary cross-entropy between sigmoid(logits)
/// and labels, computed as max(x,0) - x*y + log1p(exp(-|x|)).
LossAndGrad sigmoid_bce_with_logits(const Matrix& logits, const Matrix& labels);

/// Max-shifted log-sum-exp. Throws ShapeError on an empty input.
double logsumexp(std::span<const double> values);
/// Per-row log-sum-exp of a matrix with at least one column.
Vector logsumexp_rows(const Matrix& values);
/// Per-row softmax.
Matrix softmax_rows(const Matrix& logits);

}  // namespace crl
