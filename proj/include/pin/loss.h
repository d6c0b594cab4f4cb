#ifndef PIN_LOSS_H_
#define PIN_LOSS_H_

#include <span>
#include <vector>

#include "pin/data.h"
#include "pin/model.h"

namespace pin {

// Negative log-likelihood of the gold slot labels summed over valid tokens
// and utterances. slot_probs is one [B x n_slots] tensor per step.
Tensor slot_loss(Tape &tape, const std::vector<Tensor> &slot_probs, const UtteranceBatch &batch);

// Negative log-likelihood of the gold intents summed over utterances.
Tensor intent_loss(Tape &tape, const Tensor &intent_probs, std::span<const int> gold);

// lambda * slot + (1 - lambda) * intent, lambda in [0, 1].
Tensor joint_loss(Tape &tape, const Tensor &slot, const Tensor &intent, double lambda);

struct BatchLoss {
  Tensor total;
  Tensor slot;
  Tensor intent;
};

BatchLoss model_loss(Tape &tape, const ForwardOutput &out, const UtteranceBatch &batch, double lambda);

}  // namespace pin

#endif  // PIN_LOSS_H_
