#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "c2rec/model.hpp"

namespace c2rec {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// One Adam update of a flat tensor; t is the 1-based step count for this
// tensor (bias correction).
void adam_update(std::span<double> theta, std::span<const double> grad, std::span<double> m,
                 std::span<double> v, std::uint64_t t, const AdamConfig& cfg);

// Adam over a full parameter set. Dense tensors advance every step; the four
// embedding tables keep per-row moments and step counts, and a row is updated
// only when it appears in the batch with a nonzero gradient.
class AdamState {
public:
    explicit AdamState(const Parameters& shape);

    // throws Error naming the tensor if a gradient is non-finite
    void apply(Parameters& params, const Gradients& grads, const AdamConfig& cfg);

    std::uint64_t steps() const { return step_; }

private:
    Parameters m_, v_;
    std::array<std::vector<std::uint64_t>, 4> row_steps_;  // user_shared, user_off, user_on, item
    std::uint64_t step_ = 0;
};

}  // namespace c2rec
