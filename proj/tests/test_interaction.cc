#include <cmath>

#include "doctest.h"
#include "pin/gradcheck.h"
#include "pin/interaction.h"
#include "test_util.h"

namespace pin {
namespace {

using testing::bit_equal;
using testing::random_tensor;

constexpr std::size_t kWidth = 5;
constexpr std::size_t kHidden = 4;

// Encoder output stand-in: random e_t rows, padded rows zeroed.
struct Fixture {
  Rng rng{21};
  UtteranceBatch batch;
  EncodedUtterance enc;

  Fixture() {
    std::vector<EncodedSample> samples{{{2, 3, 4}, {1, 2, 0}, 1}, {{5, 6}, {2, 0}, 0}};
    batch = pad_batch(std::span<const EncodedSample>(samples));
    enc.mask = SequenceMask::from_batch(batch);
    enc.width = kWidth;
    for (std::size_t t = 0; t < batch.max_len; ++t) {
      Tensor e = random_tensor(rng, {batch.batch, kWidth});
      for (std::size_t b = 0; b < batch.batch; ++b)
        if (!batch.valid(b, t))
          for (std::size_t j = 0; j < kWidth; ++j) e.values()[b * kWidth + j] = 0.0;
      enc.e.push_back(e);
    }
  }
};

Tensor one_hot(std::size_t batch, std::size_t n, const std::vector<int> &labels) {
  Tensor t = Tensor::zeros({batch, n});
  for (std::size_t b = 0; b < batch; ++b)
    if (labels[b] >= 0) t.values()[b * n + static_cast<std::size_t>(labels[b])] = 1.0;
  return t;
}

TEST_CASE_FIXTURE(Fixture, "decoder shapes and row-stochastic traces") {
  DecoderParams is = DecoderParams::create(3, 0, kWidth, kHidden, rng);
  DecoderParams ri = DecoderParams::create(2, 3, kWidth, kHidden, rng);
  CHECK(is.input_size() == 3 + kWidth);
  CHECK(ri.input_size() == 2 + 3 + kWidth);
  CHECK(is.projection.shape() == Shape{kHidden, 3});
  Tape tape;
  DecoderTrace slot = intuitive_slot_decode(tape, enc, is, batch, TeacherForcing::off());
  DecoderTrace intent = rational_intent_decode(tape, enc, slot, ri, batch, TeacherForcing::off());
  REQUIRE(slot.probs.size() == 3);
  for (const DecoderTrace *tr : {&slot, &intent})
    for (const Tensor &p : tr->probs)
      for (std::size_t b = 0; b < 2; ++b) {
        double s = 0.0;
        for (std::size_t k = 0; k < p.dim(1); ++k) s += p.at(b, k);
        CHECK(std::abs(s - 1.0) <= 1e-12);
      }
}

TEST_CASE_FIXTURE(Fixture, "first step sees a zero previous distribution") {
  DecoderParams p = DecoderParams::create(3, 0, kWidth, kHidden, rng);
  Tape tape;
  Rng tf_rng(1);
  DecoderTrace tr = intuitive_slot_decode(tape, enc, p, batch, {1.0, &tf_rng});
  Tensor x = concat(tape, {Tensor::zeros({2, 3}), enc.e[0]}, 1);
  LstmState s = lstm_step(tape, x, LstmState::zeros(2, kHidden), p.lstm, enc.mask.step(0));
  CHECK(bit_equal(tr.hidden[0].values(), s.h.values()));
}

TEST_CASE_FIXTURE(Fixture, "full teacher forcing feeds gold one-hots") {
  DecoderParams p = DecoderParams::create(3, 0, kWidth, kHidden, rng);
  Tape tape;
  Rng tf_rng(1);
  DecoderTrace tr = intuitive_slot_decode(tape, enc, p, batch, {1.0, &tf_rng});
  LstmState s = LstmState::zeros(2, kHidden);
  Tensor prev = Tensor::zeros({2, 3});
  for (std::size_t t = 0; t < 3; ++t) {
    if (t > 0) prev = one_hot(2, 3, {batch.slot(0, t - 1), batch.slot(1, t - 1)});
    s = lstm_step(tape, concat(tape, {prev, enc.e[t]}, 1), s, p.lstm, enc.mask.step(t));
    CHECK(bit_equal(tr.hidden[t].values(), s.h.values()));
  }

  DecoderParams q = DecoderParams::create(2, 0, kWidth, kHidden, rng);
  DecoderTrace it = intuitive_intent_decode(tape, enc, q, batch, {1.0, &tf_rng});
  s = LstmState::zeros(2, kHidden);
  prev = Tensor::zeros({2, 2});
  for (std::size_t t = 0; t < 3; ++t) {
    if (t > 0) prev = one_hot(2, 2, {batch.intents[0], batch.intents[1]});
    s = lstm_step(tape, concat(tape, {prev, enc.e[t]}, 1), s, q.lstm, enc.mask.step(t));
    for (std::size_t b = 0; b < 2; ++b)
      if (batch.valid(b, t))
        for (std::size_t j = 0; j < kHidden; ++j) CHECK(it.hidden[t].at(b, j) == s.h.at(b, j));
  }
}

TEST_CASE_FIXTURE(Fixture, "evaluation decoding is deterministic and draws nothing") {
  DecoderParams p = DecoderParams::create(3, 0, kWidth, kHidden, rng);
  Rng tf_rng(5);
  const Rng before = tf_rng;
  Tape t1, t2;
  DecoderTrace a = intuitive_slot_decode(t1, enc, p, batch, {0.0, &tf_rng});
  DecoderTrace b = intuitive_slot_decode(t2, enc, p, batch, TeacherForcing::off());
  for (std::size_t t = 0; t < 3; ++t) CHECK(bit_equal(a.probs[t].values(), b.probs[t].values()));
  Rng after = tf_rng;
  Rng copy = before;
  CHECK(after.next() == copy.next());
}

TEST_CASE_FIXTURE(Fixture, "rational decoders depend on the conditioning trace") {
  DecoderParams is = DecoderParams::create(3, 0, kWidth, kHidden, rng);
  DecoderParams ri = DecoderParams::create(2, 3, kWidth, kHidden, rng);
  DecoderParams ii = DecoderParams::create(2, 0, kWidth, kHidden, rng);
  DecoderParams rs = DecoderParams::create(3, 2, kWidth, kHidden, rng);
  Tape tape;
  DecoderTrace slot = intuitive_slot_decode(tape, enc, is, batch, TeacherForcing::off());
  DecoderTrace intent = intuitive_intent_decode(tape, enc, ii, batch, TeacherForcing::off());
  DecoderTrace zero_slot = slot, zero_intent = intent;
  for (Tensor &p : zero_slot.probs) p = Tensor::zeros(p.shape());
  for (Tensor &p : zero_intent.probs) p = Tensor::zeros(p.shape());

  auto moved = [](const DecoderTrace &a, const DecoderTrace &b) {
    double most = 0.0;
    for (std::size_t t = 0; t < a.probs.size(); ++t)
      for (std::size_t i = 0; i < a.probs[t].size(); ++i)
        most = std::max(most, std::abs(a.probs[t].values()[i] - b.probs[t].values()[i]));
    return most;
  };
  CHECK(moved(rational_intent_decode(tape, enc, slot, ri, batch, TeacherForcing::off()),
              rational_intent_decode(tape, enc, zero_slot, ri, batch, TeacherForcing::off())) > 0.0);
  CHECK(moved(rational_slot_decode(tape, enc, intent, rs, batch, TeacherForcing::off()),
              rational_slot_decode(tape, enc, zero_intent, rs, batch, TeacherForcing::off())) > 0.0);
}

TEST_CASE_FIXTURE(Fixture, "intent and slot decoders mirror each other") {
  // Every gold slot id equals the utterance's intent id, so forced inputs agree.
  for (std::size_t b = 0; b < batch.batch; ++b)
    for (std::size_t t = 0; t < batch.max_len; ++t)
      if (batch.valid(b, t)) batch.slots[b * batch.max_len + t] = batch.intents[b];
  DecoderParams p = DecoderParams::create(2, 0, kWidth, kHidden, rng);
  Rng r1(3), r2(3);
  Tape tape;
  DecoderTrace s = intuitive_slot_decode(tape, enc, p, batch, {0.6, &r1});
  DecoderTrace i = intuitive_intent_decode(tape, enc, p, batch, {0.6, &r2});
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::size_t b = 0; b < 2; ++b) {
      if (!batch.valid(b, t)) continue;
      for (std::size_t k = 0; k < 2; ++k) CHECK(s.probs[t].at(b, k) == i.probs[t].at(b, k));
    }
  }
}

TEST_CASE_FIXTURE(Fixture, "padded steps contribute no gradient") {
  DecoderParams p = DecoderParams::create(3, 0, kWidth, kHidden, rng);
  Tape tape;
  DecoderTrace tr = intuitive_slot_decode(tape, enc, p, batch, TeacherForcing::off());
  std::vector<Tensor> rows;
  for (std::size_t t = 0; t < 3; ++t) rows.push_back(scale_rows(tape, tr.hidden[t], enc.mask.step(t)));
  Tensor loss = sum(tape, concat(tape, rows, 0));
  tape.backward(loss);
  // Utterance 1 has length 2: its step-2 input must get nothing.
  for (std::size_t j = 0; j < kWidth; ++j) CHECK(enc.e[2].grad()[kWidth + j] == 0.0);
}

TEST_CASE_FIXTURE(Fixture, "decoder gradient checks") {
  DecoderParams is = DecoderParams::create(3, 0, kWidth, kHidden, rng);
  DecoderParams ri = DecoderParams::create(2, 3, kWidth, kHidden, rng);
  Tensor intent_probe = random_tensor(rng, {6, 2}, 1.0, false);
  Tensor slot_probe = random_tensor(rng, {6, 3}, 1.0, false);
  auto f = [&](Tape &tape) {
    DecoderTrace slot = intuitive_slot_decode(tape, enc, is, batch, TeacherForcing::off());
    DecoderTrace intent = rational_intent_decode(tape, enc, slot, ri, batch, TeacherForcing::off());
    return add(tape, sum(tape, elementwise(tape, concat(tape, intent.probs, 0), intent_probe, Elementwise::kMul)),
               sum(tape, elementwise(tape, concat(tape, slot.probs, 0), slot_probe, Elementwise::kMul)));
  };
  CHECK(grad_check(f, {is.lstm.w_input, is.lstm.w_hidden, is.lstm.bias, is.projection, ri.lstm.w_input,
                       ri.projection, enc.e[0], enc.e[1]},
                   1e-4) <= 1e-5);
}

}  // namespace
}  // namespace pin
