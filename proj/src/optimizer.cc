#include "pin/optimizer.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pin {

AdamState AdamState::for_params(std::span<const Tensor> params) {
  AdamState s;
  for (const Tensor &p : params) {
    s.first_moment.emplace_back(p.size(), 0.0);
    s.second_moment.emplace_back(p.size(), 0.0);
  }
  return s;
}

void adam_step(std::span<Tensor> params, AdamState &state, double learning_rate, double l2_decay) {
  if (params.size() != state.first_moment.size()) {
    throw std::invalid_argument("adam_step: state tracks " + std::to_string(state.first_moment.size()) +
                                " tensors, got " + std::to_string(params.size()));
  }
  ++state.step;
  const double correction1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor &p = params[k];
    auto &m = state.first_moment[k];
    auto &v = state.second_moment[k];
    if (m.size() != p.size()) {
      throw std::invalid_argument("adam_step: moment buffer " + std::to_string(k) +
                                  " does not match its parameter");
    }
    double *theta = p.data();
    const double *grad = p.grad_data();
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double g = grad[i] + l2_decay * theta[i];
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      theta[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

}  // namespace pin
