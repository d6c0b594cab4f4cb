#include "pin/cooperation.h"

#include <cmath>
#include <stdexcept>

namespace pin {

GateMlp GateMlp::create(std::size_t hidden, Rng &rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  GateMlp m;
  m.w1 = uniform_tensor({hidden, hidden}, bound, rng);
  m.b1 = Tensor::zeros({hidden}, true);
  m.w2 = uniform_tensor({hidden, hidden}, bound, rng);
  m.b2 = Tensor::zeros({hidden}, true);
  return m;
}

CooperationParams CooperationParams::create(std::size_t hidden, std::size_t n_slots,
                                            std::size_t n_intents, Rng &rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  CooperationParams p;
  p.slot_gate = GateMlp::create(hidden, rng);
  p.intent_gate = GateMlp::create(hidden, rng);
  p.slot_output = uniform_tensor({hidden, n_slots}, bound, rng);
  p.intent_output = uniform_tensor({hidden, n_intents}, bound, rng);
  return p;
}

Tensor gate(Tape &tape, const Tensor &h_rational, const GateMlp &mlp) {
  Tensor hidden = tanh(tape, add_bias(tape, matmul(tape, h_rational, mlp.w1), mlp.b1));
  return softmax(tape, add_bias(tape, matmul(tape, hidden, mlp.w2), mlp.b2), 1);
}

Tensor fuse(Tape &tape, const Tensor &h_rational, const Tensor &h_intuitive, const Tensor &r) {
  if (h_rational.shape() != h_intuitive.shape() || h_rational.shape() != r.shape()) {
    throw DimensionError("fuse: widths differ " + shape_string(h_rational.shape()) + ", " +
                         shape_string(h_intuitive.shape()) + ", " + shape_string(r.shape()));
  }
  return add(tape, mul(tape, h_rational, r), mul(tape, h_intuitive, affine(tape, r, -1.0, 1.0)));
}

Tensor masked_sum(Tape &tape, const std::vector<Tensor> &features, const SequenceMask &mask) {
  if (features.empty()) throw std::invalid_argument("masked_sum: empty sequence");
  Tensor total = scale_rows(tape, features[0], mask.step(0));
  for (std::size_t t = 1; t < features.size(); ++t)
    total = add(tape, total, scale_rows(tape, features[t], mask.step(t)));
  return total;
}

Tensor fuse_intent(Tape &tape, const std::vector<Tensor> &rational,
                   const std::vector<Tensor> &intuitive, const std::vector<Tensor> &gates,
                   const SequenceMask &mask) {
  if (rational.size() != intuitive.size() || rational.size() != gates.size()) {
    throw DimensionError("fuse_intent: trace lengths differ");
  }
  std::vector<Tensor> fused;
  fused.reserve(rational.size());
  for (std::size_t t = 0; t < rational.size(); ++t)
    fused.push_back(fuse(tape, rational[t], intuitive[t], gates[t]));
  return masked_sum(tape, fused, mask);
}

Prediction predict(Tape &tape, const std::vector<Tensor> &slot_features, const Tensor &intent_features,
                   const CooperationParams &p) {
  Prediction out;
  out.slot_probs.reserve(slot_features.size());
  for (const Tensor &h : slot_features)
    out.slot_probs.push_back(softmax(tape, matmul(tape, h, p.slot_output), 1));
  out.intent_probs = softmax(tape, matmul(tape, intent_features, p.intent_output), 1);
  return out;
}

std::vector<int> argmax_rows(const Tensor &probs) {
  const std::size_t rows = probs.dim(0), cols = probs.dim(1);
  std::vector<int> out(rows, 0);
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < cols; ++c)
      if (probs.at(r, c) > probs.at(r, best)) best = c;
    out[r] = static_cast<int>(best);
  }
  return out;
}

}  // namespace pin
