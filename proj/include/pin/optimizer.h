#ifndef PIN_OPTIMIZER_H_
#define PIN_OPTIMIZER_H_

#include <cstdint>
#include <span>
#include <vector>

#include "pin/tensor.h"

namespace pin {

struct AdamState {
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
  std::int64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState for_params(std::span<const Tensor> params);
};

// Bias-corrected Adam update from each tensor's accumulated gradient. L2
// decay adds l2_decay * theta to the gradient before the moment updates.
void adam_step(std::span<Tensor> params, AdamState &state, double learning_rate, double l2_decay);

}  // namespace pin

#endif  // PIN_OPTIMIZER_H_
