#include "crl/numcore/mlp.hpp"

#include <cmath>

namespace crl {

void axpy(ParamList& into, const ParamList& from, double scale) {
    if (into.size() != from.size()) throw ShapeError("axpy: parameter list lengths differ");
    for (std::size_t i = 0; i < into.size(); ++i) {
        require_same_shape(into[i], from[i], "axpy");
        into[i] += scale * from[i];
    }
}

ParamList zeros_like(const ParamList& params) {
    ParamList out;
    out.reserve(params.size());
    for (const auto& p : params) out.push_back(Matrix::Zero(p.rows(), p.cols()));
    return out;
}

Matrix hconcat(const Matrix& left, const Matrix& right) {
    if (left.rows() != right.rows()) throw ShapeError("hconcat: row counts differ");
    Matrix out(left.rows(), left.cols() + right.cols());
    out << left, right;
    return out;
}

Mlp::Mlp(std::vector<int> layer_sizes, Rng& rng) : sizes_(std::move(layer_sizes)) {
    check_sizes();
    for (int l = 0; l < num_layers(); ++l) {
        const int fan_in = sizes_[l];
        const double limit = std::sqrt(6.0 / fan_in);
        Matrix w(fan_in, sizes_[l + 1]);
        // Fill column-major order explicitly so the draw order is fixed.
        for (Eigen::Index c = 0; c < w.cols(); ++c)
            for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = rng.uniform(-limit, limit);
        params_.push_back(std::move(w));
        params_.push_back(Matrix::Zero(1, sizes_[l + 1]));
    }
}

Mlp Mlp::zeros(std::vector<int> layer_sizes) {
    Mlp net;
    net.sizes_ = std::move(layer_sizes);
    net.check_sizes();
    for (int l = 0; l < net.num_layers(); ++l) {
        net.params_.push_back(Matrix::Zero(net.sizes_[l], net.sizes_[l + 1]));
        net.params_.push_back(Matrix::Zero(1, net.sizes_[l + 1]));
    }
    return net;
}

void Mlp::check_sizes() const {
    if (sizes_.size() < 2) throw ConfigError("Mlp: need at least input and output sizes");
    for (int s : sizes_)
        if (s <= 0) throw ConfigError("Mlp: layer sizes must be positive");
}

Matrix Mlp::forward(const Matrix& input) const {
    require_cols(input, input_size(), "Mlp::forward");
    Matrix h = input;
    for (int l = 0; l < num_layers(); ++l) {
        Matrix z = h * weight(l);
        z.rowwise() += bias(l).row(0);
        if (l + 1 < num_layers()) z = z.cwiseMax(0.0);
        h = std::move(z);
    }
    return h;
}

Matrix Mlp::forward(const Matrix& input, Tape& tape) const {
    require_cols(input, input_size(), "Mlp::forward");
    tape.inputs.assign(num_layers(), Matrix());
    tape.pre.assign(num_layers(), Matrix());
    Matrix h = input;
    for (int l = 0; l < num_layers(); ++l) {
        tape.inputs[l] = h;
        Matrix z = h * weight(l);
        z.rowwise() += bias(l).row(0);
        tape.pre[l] = z;
        h = (l + 1 < num_layers()) ? Matrix(z.cwiseMax(0.0)) : z;
    }
    return h;
}

Mlp::Gradients Mlp::backward(const Tape& tape, const Matrix& upstream) const {
    if (static_cast<int>(tape.inputs.size()) != num_layers())
        throw ShapeError("Mlp::backward: tape does not match network depth");
    const Matrix& out = tape.pre.back();
    require_same_shape(upstream, out, "Mlp::backward upstream");

    Gradients g;
    g.params.resize(params_.size());
    Matrix delta = upstream;
    for (int l = num_layers() - 1; l >= 0; --l) {
        if (l + 1 < num_layers()) delta = delta.cwiseProduct((tape.pre[l].array() > 0.0).cast<double>().matrix());
        g.params[2 * l] = tape.inputs[l].transpose() * delta;
        g.params[2 * l + 1] = delta.colwise().sum();
        delta = delta * weight(l).transpose();
    }
    g.input = std::move(delta);
    return g;
}

std::vector<std::string> Mlp::param_names(std::string_view prefix) const {
    std::vector<std::string> names;
    for (int l = 0; l < num_layers(); ++l) {
        names.push_back(std::string(prefix) + ".w" + std::to_string(l));
        names.push_back(std::string(prefix) + ".b" + std::to_string(l));
    }
    return names;
}

}  // namespace crl
