#include "pin/interaction.h"

#include <cmath>
#include <stdexcept>

namespace pin {

DecoderParams DecoderParams::create(std::size_t n_labels, std::size_t condition_width,
                                    std::size_t encoding_width, std::size_t hidden, Rng &rng) {
  DecoderParams p;
  p.lstm = LstmParams::create(n_labels + condition_width + encoding_width, hidden, rng);
  p.projection = uniform_tensor({hidden, n_labels}, 1.0 / std::sqrt(static_cast<double>(hidden)), rng);
  p.n_labels = n_labels;
  p.condition_width = condition_width;
  return p;
}

GoldLabels gold_slots(const UtteranceBatch &batch) {
  return [&batch](std::size_t t, std::size_t b) { return batch.slot(b, t); };
}

GoldLabels gold_intents(const UtteranceBatch &batch) {
  return [&batch](std::size_t, std::size_t b) { return batch.intents[b]; };
}

namespace {

// Previous-step input for step t >= 1: the decoder's own distribution, with
// teacher-forced rows swapped for the gold one-hot of step t - 1.
Tensor previous_input(Tape &tape, const Tensor &prev_probs, const EncodedUtterance &enc,
                      std::size_t t, const GoldLabels &gold, const TeacherForcing &tf) {
  if (tf.rate <= 0.0) return prev_probs;
  if (tf.rng == nullptr) throw std::invalid_argument("teacher forcing needs an rng");
  const std::size_t batch = prev_probs.dim(0), labels = prev_probs.dim(1);
  std::vector<double> keep(batch, 1.0);
  std::vector<double> forced(batch * labels, 0.0);
  bool any = false;
  for (std::size_t b = 0; b < batch; ++b) {
    if (!tf.rng->bernoulli(tf.rate)) continue;
    const int label = gold(t - 1, b);
    if (label < 0 || !enc.mask.valid(t - 1, b)) continue;
    if (static_cast<std::size_t>(label) >= labels) {
      throw std::out_of_range("teacher forcing: gold label " + std::to_string(label) +
                              " outside " + std::to_string(labels) + " classes");
    }
    keep[b] = 0.0;
    forced[b * labels + static_cast<std::size_t>(label)] = 1.0;
    any = true;
  }
  if (!any) return prev_probs;
  return add(tape, scale_rows(tape, prev_probs, keep),
             Tensor::from({batch, labels}, std::move(forced)));
}

}  // namespace

DecoderTrace run_decoder(Tape &tape, const EncodedUtterance &enc,
                         const std::vector<Tensor> &condition, const DecoderParams &p,
                         const GoldLabels &gold, const TeacherForcing &tf) {
  const std::size_t steps = enc.e.size();
  if (steps == 0) throw std::invalid_argument("decoder: empty sequence");
  if (condition.size() != (p.condition_width > 0 ? steps : 0)) {
    throw DimensionError("decoder: conditioning trace has " + std::to_string(condition.size()) +
                         " steps, expected " + std::to_string(p.condition_width > 0 ? steps : 0));
  }
  const std::size_t batch = enc.e.front().dim(0);
  DecoderTrace trace;
  LstmState state = LstmState::zeros(batch, p.lstm.hidden_size());
  Tensor prev = Tensor::zeros({batch, p.n_labels});
  for (std::size_t t = 0; t < steps; ++t) {
    if (t > 0) prev = previous_input(tape, trace.probs.back(), enc, t, gold, tf);
    std::vector<Tensor> parts{prev};
    if (p.condition_width > 0) parts.push_back(condition[t]);
    parts.push_back(enc.e[t]);
    state = lstm_step(tape, concat(tape, parts, 1), state, p.lstm, enc.mask.step(t));
    trace.hidden.push_back(state.h);
    trace.probs.push_back(softmax(tape, matmul(tape, state.h, p.projection), 1));
  }
  return trace;
}

DecoderTrace intuitive_slot_decode(Tape &tape, const EncodedUtterance &enc, const DecoderParams &p,
                                   const UtteranceBatch &batch, const TeacherForcing &tf) {
  return run_decoder(tape, enc, {}, p, gold_slots(batch), tf);
}

DecoderTrace rational_intent_decode(Tape &tape, const EncodedUtterance &enc,
                                    const DecoderTrace &intuitive_slot, const DecoderParams &p,
                                    const UtteranceBatch &batch, const TeacherForcing &tf) {
  return run_decoder(tape, enc, intuitive_slot.probs, p, gold_intents(batch), tf);
}

DecoderTrace intuitive_intent_decode(Tape &tape, const EncodedUtterance &enc,
                                     const DecoderParams &p, const UtteranceBatch &batch,
                                     const TeacherForcing &tf) {
  return run_decoder(tape, enc, {}, p, gold_intents(batch), tf);
}

DecoderTrace rational_slot_decode(Tape &tape, const EncodedUtterance &enc,
                                  const DecoderTrace &intuitive_intent, const DecoderParams &p,
                                  const UtteranceBatch &batch, const TeacherForcing &tf) {
  return run_decoder(tape, enc, intuitive_intent.probs, p, gold_slots(batch), tf);
}

}  // namespace pin
