#include "crl/numcore/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace crl {

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double log_sigmoid(double x) { return -softplus(-x); }

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

LossAndGrad sigmoid_bce_with_logits(const Matrix& logits, const Matrix& labels) {
    require_same_shape(logits, labels, "sigmoid_bce_with_logits");
    const auto n = static_cast<double>(logits.size());
    if (logits.size() == 0) throw ShapeError("sigmoid_bce_with_logits: empty input");
    LossAndGrad out;
    out.grad.resize(logits.rows(), logits.cols());
    double total = 0.0;
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
        for (Eigen::Index r = 0; r < logits.rows(); ++r) {
            const double x = logits(r, c);
            const double y = labels(r, c);
            total += std::max(x, 0.0) - x * y + std::log1p(std::exp(-std::abs(x)));
            out.grad(r, c) = (sigmoid(x) - y) / n;
        }
    }
    out.loss = total / n;
    return out;
}

double logsumexp(std::span<const double> values) {
    if (values.empty()) throw ShapeError("logsumexp: empty axis");
    const double m = *std::max_element(values.begin(), values.end());
    if (std::isinf(m)) return m;
    double s = 0.0;
    for (double v : values) s += std::exp(v - m);
    return m + std::log(s);
}

Vector logsumexp_rows(const Matrix& values) {
    if (values.cols() == 0) throw ShapeError("logsumexp_rows: empty axis");
    Vector out(values.rows());
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
        const double m = values.row(r).maxCoeff();
        if (std::isinf(m)) {
            out(r) = m;
            continue;
        }
        out(r) = m + std::log((values.row(r).array() - m).exp().sum());
    }
    return out;
}

Matrix softmax_rows(const Matrix& logits) {
    Matrix out(logits.rows(), logits.cols());
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        const double m = logits.row(r).maxCoeff();
        out.row(r) = (logits.row(r).array() - m).exp().matrix();
        out.row(r) /= out.row(r).sum();
    }
    return out;
}

}  // namespace crl
