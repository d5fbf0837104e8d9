#include "crl/numcore/adam.hpp"

#include <cmath>

namespace crl {

Adam::Adam(AdamConfig config, std::vector<std::string> names, const ParamList& like)
    : config_(config), names_(std::move(names)) {
    if (names_.size() != like.size()) throw ShapeError("Adam: one name per parameter required");
    if (!(config_.learning_rate > 0.0)) throw ConfigError("Adam: learning rate must be positive");
    state_.first_moment = zeros_like(like);
    state_.second_moment = zeros_like(like);
}

void Adam::step(ParamList& params, const ParamList& grads) {
    if (params.size() != state_.first_moment.size() || grads.size() != params.size())
        throw ShapeError("Adam::step: parameter/gradient count mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
        require_same_shape(params[i], state_.first_moment[i], "Adam::step params");
        require_same_shape(grads[i], params[i], "Adam::step grads");
        if (!grads[i].allFinite()) throw NumericError("Adam::step: non-finite gradient for parameter '" + names_[i] + "'");
    }

    const std::int64_t t = ++state_.step_count;
    const double b1 = config_.beta1, b2 = config_.beta2;
    const double correction1 = 1.0 - std::pow(b1, static_cast<double>(t));
    const double correction2 = 1.0 - std::pow(b2, static_cast<double>(t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Matrix& m = state_.first_moment[i];
        Matrix& v = state_.second_moment[i];
        m = b1 * m + (1.0 - b1) * grads[i];
        v = b2 * v + (1.0 - b2) * grads[i].cwiseProduct(grads[i]);
        const auto m_hat = m.array() / correction1;
        const auto v_hat = v.array() / correction2;
        params[i].array() -= config_.learning_rate * m_hat / (v_hat.sqrt() + config_.epsilon);
    }
}

}  // namespace crl
