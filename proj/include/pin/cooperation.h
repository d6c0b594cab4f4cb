// Cooperation mechanism: a softmax gate computed from the rational feature
// blends rational and intuitive features per coordinate, and the blended
// features feed the final slot and intent classifiers.

#ifndef PIN_COOPERATION_H_
#define PIN_COOPERATION_H_

#include <cstddef>
#include <vector>

#include "pin/encoder.h"

namespace pin {

// tanh hidden layer of width h, linear output of width h.
struct GateMlp {
  Tensor w1;  // [h x h]
  Tensor b1;  // [h]
  Tensor w2;  // [h x h]
  Tensor b2;  // [h]

  static GateMlp create(std::size_t hidden, Rng &rng);
};

struct CooperationParams {
  GateMlp slot_gate;
  GateMlp intent_gate;
  Tensor slot_output;    // [h x n_slots]
  Tensor intent_output;  // [h x n_intents]

  static CooperationParams create(std::size_t hidden, std::size_t n_slots, std::size_t n_intents,
                                  Rng &rng);
};

// r = softmax over features of MLP(h_rational); [B x h] -> [B x h].
Tensor gate(Tape &tape, const Tensor &h_rational, const GateMlp &mlp);

// h_rational * r + h_intuitive * (1 - r)
Tensor fuse(Tape &tape, const Tensor &h_rational, const Tensor &h_intuitive, const Tensor &r);

inline Tensor fuse_slot(Tape &tape, const Tensor &h_rational_slot, const Tensor &h_intuitive_slot,
                        const Tensor &r) {
  return fuse(tape, h_rational_slot, h_intuitive_slot, r);
}

// Sum over valid steps of fuse(rational_t, intuitive_t, gates_t) -> [B x h].
Tensor fuse_intent(Tape &tape, const std::vector<Tensor> &rational,
                   const std::vector<Tensor> &intuitive, const std::vector<Tensor> &gates,
                   const SequenceMask &mask);

// Sum over valid steps of features_t -> [B x h].
Tensor masked_sum(Tape &tape, const std::vector<Tensor> &features, const SequenceMask &mask);

struct Prediction {
  std::vector<Tensor> slot_probs;  // per step [B x n_slots]
  Tensor intent_probs;             // [B x n_intents]
};

Prediction predict(Tape &tape, const std::vector<Tensor> &slot_features, const Tensor &intent_features,
                   const CooperationParams &p);

// Index of the largest entry of each row; ties go to the lowest index.
std::vector<int> argmax_rows(const Tensor &probs);

}  // namespace pin

#endif  // PIN_COOPERATION_H_
