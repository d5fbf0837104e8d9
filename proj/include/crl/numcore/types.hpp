#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace crl {

/// Batches are row-major in the sense of "one sample per row": a B x n matrix
/// holds B inputs of width n.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// Flat, ordered list of parameter (or gradient) tensors.
using ParamList = std::vector<Matrix>;

struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline void require_cols(const Matrix& m, Eigen::Index cols, const char* what) {
    if (m.cols() != cols)
        throw ShapeError(std::string(what) + ": expected " + std::to_string(cols) + " columns, got " +
                         std::to_string(m.cols()));
}

inline void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ShapeError(std::string(what) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()) + ")");
}

/// Elementwise accumulation `into += scale * from` over two parameter lists.
void axpy(ParamList& into, const ParamList& from, double scale = 1.0);

ParamList zeros_like(const ParamList& params);

/// Horizontal concatenation of two batches with equal row counts.
Matrix hconcat(const Matrix& left, const Matrix& right);

}  // namespace crl
