#include "pin/loss.h"

#include <stdexcept>
#include <string>

#include "pin/ops.h"

namespace pin {

Tensor slot_loss(Tape &tape, const std::vector<Tensor> &slot_probs, const UtteranceBatch &batch) {
  if (slot_probs.size() != batch.max_len) {
    throw DimensionError("slot_loss: " + std::to_string(slot_probs.size()) + " steps for batch of length " +
                         std::to_string(batch.max_len));
  }
  std::vector<int> gold(batch.batch);
  Tensor total;
  for (std::size_t t = 0; t < batch.max_len; ++t) {
    for (std::size_t b = 0; b < batch.batch; ++b) gold[b] = batch.valid(b, t) ? batch.slot(b, t) : kNoLabel;
    Tensor step = nll(tape, slot_probs[t], gold);
    total = total.defined() ? add(tape, total, step) : step;
  }
  return total;
}

Tensor intent_loss(Tape &tape, const Tensor &intent_probs, std::span<const int> gold) {
  return nll(tape, intent_probs, gold);
}

Tensor joint_loss(Tape &tape, const Tensor &slot, const Tensor &intent, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("joint_loss: lambda must be in [0, 1], got " + std::to_string(lambda));
  }
  return add(tape, affine(tape, slot, lambda, 0.0), affine(tape, intent, 1.0 - lambda, 0.0));
}

BatchLoss model_loss(Tape &tape, const ForwardOutput &out, const UtteranceBatch &batch, double lambda) {
  BatchLoss loss;
  loss.slot = slot_loss(tape, out.prediction.slot_probs, batch);
  loss.intent = intent_loss(tape, out.prediction.intent_probs, batch.intents);
  loss.total = joint_loss(tape, loss.slot, loss.intent, lambda);
  return loss;
}

}  // namespace pin
