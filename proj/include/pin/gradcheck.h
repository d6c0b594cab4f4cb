#ifndef PIN_GRADCHECK_H_
#define PIN_GRADCHECK_H_

#include <functional>
#include <span>
#include <vector>

#include "pin/tensor.h"

namespace pin {

// Builds a scalar loss on the given tape from tensors it has captured. Must be
// deterministic: the checker calls it once per perturbed coordinate.
using LossFn = std::function<Tensor(Tape &)>;

struct GradCheckReport {
  // Worst relative error per parameter tensor, in the order given.
  std::vector<double> per_param;
  // True if every analytic gradient entry of that tensor is exactly zero.
  std::vector<bool> zero_grad;
  double max_error = 0.0;
};

// Compares reverse-mode gradients against central differences
// (f(p + eps) - f(p - eps)) / (2 eps), coordinate by coordinate. The relative
// error denominator is max(|analytic|, |numeric|, 1e-8). Parameter gradients
// are overwritten.
GradCheckReport grad_check_report(const LossFn &f, std::vector<Tensor> params, double epsilon);

// Same comparison over several step sizes, keeping each coordinate's smallest
// relative error. Large steps suit tiny gradients, where round-off in f
// dominates; small steps suit strongly curved coordinates.
GradCheckReport grad_check_report(const LossFn &f, std::vector<Tensor> params,
                                  std::span<const double> epsilons);

inline double grad_check(const LossFn &f, std::vector<Tensor> params, double epsilon) {
  return grad_check_report(f, std::move(params), epsilon).max_error;
}

}  // namespace pin

#endif  // PIN_GRADCHECK_H_
