// The full parallel interactive network: encoder, both interaction modules,
// cooperation gates and output classifiers, with the four ablations.

#ifndef PIN_MODEL_H_
#define PIN_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "pin/cooperation.h"
#include "pin/data.h"
#include "pin/encoder.h"
#include "pin/interaction.h"

namespace pin {

struct ModelDims {
  std::size_t vocab = 0;
  std::size_t emb_dim = 512;
  std::size_t hidden = 256;
  std::size_t n_slots = 0;
  std::size_t n_intents = 0;

  bool operator==(const ModelDims &) const = default;
};

// Each flag removes one component structurally:
//  no_slot2intent         intent features come from the intuitive intent decoder alone;
//                         the rational intent decoder and intent gate are unused.
//  no_intent2slot         slot features come from the intuitive slot decoder alone;
//                         the rational slot decoder and slot gate are unused.
//  no_gaussian_attention  E = H; attention parameters are unused and E narrows.
//  no_cooperation         features come from the rational decoders alone; both gates unused.
struct Ablation {
  bool no_slot2intent = false;
  bool no_intent2slot = false;
  bool no_gaussian_attention = false;
  bool no_cooperation = false;

  bool operator==(const Ablation &) const = default;
};

struct NamedParam {
  std::string name;
  std::string group;
  Tensor tensor;
};

struct ForwardOptions {
  bool training = false;
  double dropout_rate = 0.0;
  double teacher_forcing_rate = 0.0;
  Rng *rng = nullptr;  // dropout and teacher-forcing draws

  static ForwardOptions evaluation() { return {}; }
};

struct ForwardOutput {
  EncodedUtterance encoded;
  DecoderTrace intuitive_slot;
  DecoderTrace rational_intent;
  DecoderTrace intuitive_intent;
  DecoderTrace rational_slot;
  std::vector<Tensor> slot_features;
  Tensor intent_features;
  Prediction prediction;
};

class PinModel {
 public:
  PinModel(const ModelDims &dims, const Ablation &ablation, std::uint64_t seed);

  const ModelDims &dims() const { return dims_; }
  const Ablation &ablation() const { return ablation_; }

  // no_gaussian_attention fixes the decoder input widths, so it cannot be
  // toggled after construction; the other flags can.
  void set_ablation(const Ablation &ablation);

  // Every parameter in a fixed order, and the subset the current ablation
  // actually uses.
  std::vector<NamedParam> parameters() const;
  std::vector<NamedParam> active_parameters() const;
  std::vector<Tensor> active_tensors() const;
  bool is_active_group(const std::string &group) const;

  void zero_grad();
  void rezero_pad();

  std::size_t encoding_width() const;

  ForwardOutput forward(Tape &tape, const UtteranceBatch &batch, const ForwardOptions &options) const;

  EncoderParams encoder;
  DecoderParams intuitive_slot;
  DecoderParams rational_intent;
  DecoderParams intuitive_intent;
  DecoderParams rational_slot;
  CooperationParams cooperation;

 private:
  ModelDims dims_;
  Ablation ablation_;
};

struct DecodedBatch {
  std::vector<int> intents;             // per utterance
  std::vector<std::vector<int>> slots;  // per utterance, unpadded
};

// Argmax labels from a forward pass.
DecodedBatch decode_predictions(const ForwardOutput &out, const UtteranceBatch &batch);

}  // namespace pin

#endif  // PIN_MODEL_H_
