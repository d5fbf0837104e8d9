#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "crl/numcore/mlp.hpp"
#include "crl/numcore/rng.hpp"
#include "crl/numcore/types.hpp"

namespace crl::test {

/// Norm-wise relative error ||analytic - numeric|| / max(||analytic||, ||numeric||)
/// between the given gradients and central differences of `loss` over every
/// entry of `params`. `loss` must read the current values of `params`.
inline double gradient_rel_error(ParamList& params, const ParamList& grads, const std::function<double()>& loss,
                                 double h = 1e-6) {
    double diff = 0.0, na = 0.0, nn = 0.0;
    for (std::size_t p = 0; p < params.size(); ++p) {
        for (Eigen::Index i = 0; i < params[p].size(); ++i) {
            double& x = params[p].data()[i];
            const double orig = x;
            x = orig + h;
            const double up = loss();
            x = orig - h;
            const double down = loss();
            x = orig;
            const double numeric = (up - down) / (2.0 * h);
            const double analytic = grads[p].data()[i];
            diff += (analytic - numeric) * (analytic - numeric);
            na += analytic * analytic;
            nn += numeric * numeric;
        }
    }
    const double scale = std::max(std::sqrt(na), std::sqrt(nn));
    return scale == 0.0 ? std::sqrt(diff) : std::sqrt(diff) / scale;
}

/// Same check for the gradient with respect to a single input matrix.
inline double input_rel_error(Matrix& input, const Matrix& grad, const std::function<double()>& loss,
                              double h = 1e-6) {
    ParamList params{input};
    const ParamList grads{grad};
    const double err = gradient_rel_error(params, grads, [&] {
        input = params[0];
        return loss();
    }, h);
    input = params[0];
    return err;
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double scale = 1.0) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
    return m;
}

/// Freshly initialized networks have zero biases, which puts ReLU units of
/// fully inactive rows exactly on the kink where finite differences disagree
/// with the subgradient. Gradient tests randomize biases first.
inline void randomize_biases(Mlp& net, Rng& rng, double scale = 0.1) {
    for (int l = 0; l < net.num_layers(); ++l)
        for (Eigen::Index i = 0; i < net.bias(l).size(); ++i) net.bias(l)(i) = scale * rng.normal();
}

}  // namespace crl::test
