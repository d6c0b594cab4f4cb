// Slot2Intent and Intent2Slot decoders.
//
// Each module pairs an intuitive decoder, which reads only the encoder output
// and its own previous label distribution, with a rational decoder that also
// reads the intuitive decoder's per-token distribution for the other task.

#ifndef PIN_INTERACTION_H_
#define PIN_INTERACTION_H_

#include <cstddef>
#include <functional>
#include <vector>

#include "pin/data.h"
#include "pin/encoder.h"

namespace pin {

struct DecoderParams {
  LstmParams lstm;
  Tensor projection;  // [hidden x n_labels]
  std::size_t n_labels = 0;
  std::size_t condition_width = 0;  // width of the other task's distribution, 0 if intuitive

  // Input = previous own distribution (+) conditioning distribution (+) e_t.
  static DecoderParams create(std::size_t n_labels, std::size_t condition_width,
                              std::size_t encoding_width, std::size_t hidden, Rng &rng);
  std::size_t input_size() const { return lstm.input_size(); }
};

struct DecoderTrace {
  std::vector<Tensor> hidden;  // per step [B x hidden]
  std::vector<Tensor> probs;   // per step [B x n_labels]
};

// Gold label of batch row b at step t, or kNoLabel.
using GoldLabels = std::function<int(std::size_t t, std::size_t b)>;

GoldLabels gold_slots(const UtteranceBatch &batch);
GoldLabels gold_intents(const UtteranceBatch &batch);

// With probability rate, independently per step and batch row, the previous
// distribution fed to a decoder is replaced by the gold one-hot of the
// previous step. Rate 0 draws nothing.
struct TeacherForcing {
  double rate = 0.0;
  Rng *rng = nullptr;

  static TeacherForcing off() { return {}; }
};

// Shared recurrence of all four decoders. `condition` is empty for intuitive
// decoders. The previous distribution at step 0 is the zero vector.
DecoderTrace run_decoder(Tape &tape, const EncodedUtterance &enc,
                         const std::vector<Tensor> &condition, const DecoderParams &p,
                         const GoldLabels &gold, const TeacherForcing &tf);

DecoderTrace intuitive_slot_decode(Tape &tape, const EncodedUtterance &enc, const DecoderParams &p,
                                   const UtteranceBatch &batch, const TeacherForcing &tf);
DecoderTrace rational_intent_decode(Tape &tape, const EncodedUtterance &enc,
                                    const DecoderTrace &intuitive_slot, const DecoderParams &p,
                                    const UtteranceBatch &batch, const TeacherForcing &tf);
DecoderTrace intuitive_intent_decode(Tape &tape, const EncodedUtterance &enc,
                                     const DecoderParams &p, const UtteranceBatch &batch,
                                     const TeacherForcing &tf);
DecoderTrace rational_slot_decode(Tape &tape, const EncodedUtterance &enc,
                                  const DecoderTrace &intuitive_intent, const DecoderParams &p,
                                  const UtteranceBatch &batch, const TeacherForcing &tf);

}  // namespace pin

#endif  // PIN_INTERACTION_H_
