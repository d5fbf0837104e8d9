#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "crl/numcore/types.hpp"

namespace crl {

struct AdamConfig {
    double learning_rate = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    ParamList first_moment;
    ParamList second_moment;
    std::int64_t step_count = 0;
};

/// Adam with bias correction (Kingma & Ba). One instance per trained component.
class Adam {
public:
    Adam() = default;
    Adam(AdamConfig config, std::vector<std::string> names, const ParamList& like);

    /// Applies one update in place. Throws NumericError naming the first
    /// parameter whose gradient is non-finite; nothing is modified in that case.
    void step(ParamList& params, const ParamList& grads);

    const AdamConfig& config() const { return config_; }
    const AdamState& state() const { return state_; }
    AdamState& state() { return state_; }
    const std::vector<std::string>& names() const { return names_; }

private:
    AdamConfig config_;
    std::vector<std::string> names_;
    AdamState state_;
};

}  // namespace crl
