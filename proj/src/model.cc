#include "pin/model.h"

#include <algorithm>
#include <stdexcept>

namespace pin {

PinModel::PinModel(const ModelDims &dims, const Ablation &ablation, std::uint64_t seed)
    : dims_(dims), ablation_(ablation) {
  if (dims.vocab < 2 || dims.emb_dim == 0 || dims.hidden == 0 || dims.n_slots == 0 ||
      dims.n_intents == 0) {
    throw std::invalid_argument("model dimensions must be positive (vocab >= 2)");
  }
  Rng rng = Rng(seed).derive(0x1417);
  encoder.embedding = EmbeddingTable::create(dims.vocab, dims.emb_dim, rng);
  encoder.forward = LstmParams::create(dims.emb_dim, dims.hidden, rng);
  encoder.backward = LstmParams::create(dims.emb_dim, dims.hidden, rng);
  encoder.attention = GaussianAttentionParams::create();
  const std::size_t width = encoding_width();
  intuitive_slot = DecoderParams::create(dims.n_slots, 0, width, dims.hidden, rng);
  rational_intent = DecoderParams::create(dims.n_intents, dims.n_slots, width, dims.hidden, rng);
  intuitive_intent = DecoderParams::create(dims.n_intents, 0, width, dims.hidden, rng);
  rational_slot = DecoderParams::create(dims.n_slots, dims.n_intents, width, dims.hidden, rng);
  cooperation = CooperationParams::create(dims.hidden, dims.n_slots, dims.n_intents, rng);
}

std::size_t PinModel::encoding_width() const {
  return 2 * dims_.hidden + (ablation_.no_gaussian_attention ? 0 : dims_.emb_dim);
}

void PinModel::set_ablation(const Ablation &ablation) {
  if (ablation.no_gaussian_attention != ablation_.no_gaussian_attention) {
    throw std::invalid_argument("no_gaussian_attention is fixed when the model is built");
  }
  ablation_ = ablation;
}

namespace {

// An intuitive decoder feeds its rational partner, the cooperation blend, or
// the prediction directly when the opposite rational decoder is ablated.
bool needs_intuitive_slot(const Ablation &a) {
  return !a.no_slot2intent || a.no_intent2slot || !a.no_cooperation;
}

bool needs_intuitive_intent(const Ablation &a) {
  return !a.no_intent2slot || a.no_slot2intent || !a.no_cooperation;
}

void add_lstm(std::vector<NamedParam> &out, const std::string &group, const LstmParams &p) {
  out.push_back({group + ".w_input", group, p.w_input});
  out.push_back({group + ".w_hidden", group, p.w_hidden});
  out.push_back({group + ".bias", group, p.bias});
}

void add_decoder(std::vector<NamedParam> &out, const std::string &group, const DecoderParams &p) {
  add_lstm(out, group, p.lstm);
  out.push_back({group + ".projection", group, p.projection});
}

void add_gate(std::vector<NamedParam> &out, const std::string &group, const GateMlp &m) {
  out.push_back({group + ".w1", group, m.w1});
  out.push_back({group + ".b1", group, m.b1});
  out.push_back({group + ".w2", group, m.w2});
  out.push_back({group + ".b2", group, m.b2});
}

}  // namespace

std::vector<NamedParam> PinModel::parameters() const {
  std::vector<NamedParam> out;
  out.push_back({"encoder.embedding", "encoder.embedding", encoder.embedding.table});
  add_lstm(out, "encoder.lstm_forward", encoder.forward);
  add_lstm(out, "encoder.lstm_backward", encoder.backward);
  out.push_back({"encoder.attention.w_raw", "encoder.attention", encoder.attention.w_raw});
  out.push_back({"encoder.attention.b_raw", "encoder.attention", encoder.attention.b_raw});
  add_decoder(out, "slot2intent.intuitive_slot", intuitive_slot);
  add_decoder(out, "slot2intent.rational_intent", rational_intent);
  add_decoder(out, "intent2slot.intuitive_intent", intuitive_intent);
  add_decoder(out, "intent2slot.rational_slot", rational_slot);
  add_gate(out, "cooperation.slot_gate", cooperation.slot_gate);
  add_gate(out, "cooperation.intent_gate", cooperation.intent_gate);
  out.push_back({"output.slot", "output.slot", cooperation.slot_output});
  out.push_back({"output.intent", "output.intent", cooperation.intent_output});
  return out;
}

bool PinModel::is_active_group(const std::string &group) const {
  const Ablation &a = ablation_;
  if (group == "encoder.attention") return !a.no_gaussian_attention;
  if (group == "slot2intent.rational_intent") return !a.no_slot2intent;
  if (group == "intent2slot.rational_slot") return !a.no_intent2slot;
  if (group == "cooperation.slot_gate") return !a.no_cooperation && !a.no_intent2slot;
  if (group == "cooperation.intent_gate") return !a.no_cooperation && !a.no_slot2intent;
  if (group == "slot2intent.intuitive_slot") return needs_intuitive_slot(a);
  if (group == "intent2slot.intuitive_intent") return needs_intuitive_intent(a);
  return true;
}

std::vector<NamedParam> PinModel::active_parameters() const {
  std::vector<NamedParam> out;
  for (NamedParam &p : parameters())
    if (is_active_group(p.group)) out.push_back(std::move(p));
  return out;
}

std::vector<Tensor> PinModel::active_tensors() const {
  std::vector<Tensor> out;
  for (const NamedParam &p : active_parameters()) out.push_back(p.tensor);
  return out;
}

void PinModel::zero_grad() {
  for (NamedParam &p : parameters()) p.tensor.zero_grad();
}

void PinModel::rezero_pad() { encoder.embedding.rezero_pad(); }

ForwardOutput PinModel::forward(Tape &tape, const UtteranceBatch &batch,
                                const ForwardOptions &options) const {
  if ((options.training && options.dropout_rate > 0.0) || options.teacher_forcing_rate > 0.0) {
    if (options.rng == nullptr) throw std::invalid_argument("forward: stochastic options need an rng");
  }
  const Ablation &a = ablation_;
  ForwardOutput out;
  EncoderOptions enc_opts;
  enc_opts.use_attention = !a.no_gaussian_attention;
  enc_opts.training = options.training;
  enc_opts.dropout_rate = options.dropout_rate;
  enc_opts.rng = options.rng;
  out.encoded = encode_utterance(tape, batch, encoder, enc_opts);
  const EncodedUtterance &enc = out.encoded;

  TeacherForcing tf;
  if (options.training) {
    tf.rate = options.teacher_forcing_rate;
    tf.rng = options.rng;
  }

  const bool use_rational_intent = !a.no_slot2intent;
  const bool use_rational_slot = !a.no_intent2slot;
  const bool need_intuitive_slot = needs_intuitive_slot(a);
  const bool need_intuitive_intent = needs_intuitive_intent(a);

  if (need_intuitive_slot) out.intuitive_slot = intuitive_slot_decode(tape, enc, intuitive_slot, batch, tf);
  if (use_rational_intent)
    out.rational_intent = rational_intent_decode(tape, enc, out.intuitive_slot, rational_intent, batch, tf);
  if (need_intuitive_intent)
    out.intuitive_intent = intuitive_intent_decode(tape, enc, intuitive_intent, batch, tf);
  if (use_rational_slot)
    out.rational_slot = rational_slot_decode(tape, enc, out.intuitive_intent, rational_slot, batch, tf);

  const std::size_t steps = enc.e.size();
  if (!use_rational_slot) {
    out.slot_features = out.intuitive_slot.hidden;
  } else if (a.no_cooperation) {
    out.slot_features = out.rational_slot.hidden;
  } else {
    for (std::size_t t = 0; t < steps; ++t) {
      Tensor r = gate(tape, out.rational_slot.hidden[t], cooperation.slot_gate);
      out.slot_features.push_back(
          fuse_slot(tape, out.rational_slot.hidden[t], out.intuitive_slot.hidden[t], r));
    }
  }

  if (!use_rational_intent) {
    out.intent_features = masked_sum(tape, out.intuitive_intent.hidden, enc.mask);
  } else if (a.no_cooperation) {
    out.intent_features = masked_sum(tape, out.rational_intent.hidden, enc.mask);
  } else {
    std::vector<Tensor> gates;
    for (std::size_t t = 0; t < steps; ++t)
      gates.push_back(gate(tape, out.rational_intent.hidden[t], cooperation.intent_gate));
    out.intent_features = fuse_intent(tape, out.rational_intent.hidden,
                                      out.intuitive_intent.hidden, gates, enc.mask);
  }

  out.prediction = predict(tape, out.slot_features, out.intent_features, cooperation);
  return out;
}

DecodedBatch decode_predictions(const ForwardOutput &out, const UtteranceBatch &batch) {
  DecodedBatch d;
  d.intents = argmax_rows(out.prediction.intent_probs);
  d.slots.resize(batch.batch);
  for (std::size_t t = 0; t < batch.max_len; ++t) {
    const std::vector<int> labels = argmax_rows(out.prediction.slot_probs[t]);
    for (std::size_t b = 0; b < batch.batch; ++b)
      if (batch.valid(b, t)) d.slots[b].push_back(labels[b]);
  }
  return d;
}

}  // namespace pin
