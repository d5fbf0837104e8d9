#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "crl/numcore/rng.hpp"
#include "crl/numcore/types.hpp"

namespace crl {

/// Fully connected network: ReLU between hidden layers, identity at the output.
///
/// Parameters are stored as [W0, b0, W1, b1, ...] with W_l of shape
/// (in_l x out_l) and b_l of shape (1 x out_l), so a batch X (B x in) maps to
/// X * W + b row-wise.
class Mlp {
public:
    /// Activations recorded by a forward pass, consumed by `backward`.
    struct Tape {
        std::vector<Matrix> inputs;  // input to layer l
        std::vector<Matrix> pre;     // pre-activation output of layer l
    };

    struct Gradients {
        ParamList params;
        Matrix input;
    };

    Mlp() = default;

    /// He-uniform initialization: W ~ U(-sqrt(6/fan_in), sqrt(6/fan_in)), b = 0.
    Mlp(std::vector<int> layer_sizes, Rng& rng);

    static Mlp zeros(std::vector<int> layer_sizes);

    const std::vector<int>& layer_sizes() const { return sizes_; }
    int input_size() const { return sizes_.front(); }
    int output_size() const { return sizes_.back(); }
    int num_layers() const { return static_cast<int>(sizes_.size()) - 1; }

    Matrix forward(const Matrix& input) const;
    Matrix forward(const Matrix& input, Tape& tape) const;

    /// Reverse-mode gradients of sum(upstream .* forward(input)).
    Gradients backward(const Tape& tape, const Matrix& upstream) const;

    ParamList& params() { return params_; }
    const ParamList& params() const { return params_; }
    std::vector<std::string> param_names(std::string_view prefix) const;

    Matrix& weight(int layer) { return params_[2 * layer]; }
    Matrix& bias(int layer) { return params_[2 * layer + 1]; }
    const Matrix& weight(int layer) const { return params_[2 * layer]; }
    const Matrix& bias(int layer) const { return params_[2 * layer + 1]; }

private:
    void check_sizes() const;

    std::vector<int> sizes_;
    ParamList params_;
};

}  // namespace crl
