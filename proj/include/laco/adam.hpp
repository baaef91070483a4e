#pragma once

#include <cstdint>
#include <vector>

#include "laco/params.hpp"

namespace laco {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::int64_t step = 0;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;

  static AdamState for_params(const ParameterStore& params, AdamConfig config);
};

// Bias-corrected Adam update. Throws NumericError naming the first parameter
// whose gradient holds a NaN or infinity; nothing is modified in that case.
void adam_step(ParameterStore& params, const GradientSet& grads, AdamState& state);

}  // namespace laco
