#include <cmath>

#include "doctest.h"
#include "pin/loss.h"
#include "pin/model.h"
#include "pin/model_check.h"
#include "test_util.h"

namespace pin {
namespace {

using testing::bit_equal;
using testing::tiny_data;

const Ablation kVariants[] = {
    {},
    {.no_slot2intent = true},
    {.no_intent2slot = true},
    {.no_gaussian_attention = true},
    {.no_cooperation = true},
};

ModelDims tiny_dims(const Vocab &vocab) {
  ModelDims d;
  d.vocab = vocab.words.size();
  d.emb_dim = 6;
  d.hidden = 5;
  d.n_slots = vocab.tags.size();
  d.n_intents = vocab.intents.size();
  return d;
}

std::vector<double> output_values(const ForwardOutput &out) {
  std::vector<double> v(out.prediction.intent_probs.values().begin(), out.prediction.intent_probs.values().end());
  for (const Tensor &t : out.prediction.slot_probs) v.insert(v.end(), t.values().begin(), t.values().end());
  return v;
}

TEST_CASE("inactive groups per ablation") {
  auto d = tiny_data();
  PinModel full(tiny_dims(d.vocab), {}, 1);
  CHECK(full.active_parameters().size() == full.parameters().size());

  PinModel no_coop(tiny_dims(d.vocab), {.no_cooperation = true}, 1);
  CHECK_FALSE(no_coop.is_active_group("cooperation.slot_gate"));
  CHECK_FALSE(no_coop.is_active_group("cooperation.intent_gate"));
  CHECK(no_coop.is_active_group("slot2intent.intuitive_slot"));
  CHECK(no_coop.is_active_group("slot2intent.rational_intent"));

  PinModel no_s2i(tiny_dims(d.vocab), {.no_slot2intent = true}, 1);
  CHECK_FALSE(no_s2i.is_active_group("slot2intent.rational_intent"));
  CHECK_FALSE(no_s2i.is_active_group("cooperation.intent_gate"));
  CHECK(no_s2i.is_active_group("slot2intent.intuitive_slot"));

  PinModel no_attn(tiny_dims(d.vocab), {.no_gaussian_attention = true}, 1);
  CHECK_FALSE(no_attn.is_active_group("encoder.attention"));
  CHECK(no_attn.encoding_width() == 2 * 5);
  CHECK(full.encoding_width() == 2 * 5 + 6);
}

TEST_CASE("disabled paths receive identically zero gradients") {
  auto d = tiny_data();
  UtteranceBatch batch = pad_batch(std::span<const EncodedSample>(d.train));
  for (const Ablation &a : kVariants) {
    PinModel model(tiny_dims(d.vocab), a, 3);
    Rng rng(5);
    ForwardOptions opts;
    opts.training = true;
    opts.dropout_rate = 0.4;
    opts.teacher_forcing_rate = 0.5;
    opts.rng = &rng;
    model.zero_grad();
    Tape tape;
    ForwardOutput out = model.forward(tape, batch, opts);
    Tensor total = model_loss(tape, out, batch, 0.5).total;
    tape.backward(total);
    for (const NamedParam &p : model.parameters()) {
      bool all_zero = true;
      for (double g : p.tensor.grad()) all_zero = all_zero && g == 0.0;
      CAPTURE(p.name);
      if (model.is_active_group(p.group)) {
        // The pad row of the embedding never gets gradient; the table as a whole does.
        CHECK_FALSE(all_zero);
      } else {
        CHECK(all_zero);
      }
    }
  }
}

TEST_CASE("toggling an ablation off restores the original outputs") {
  auto d = tiny_data();
  UtteranceBatch batch = pad_batch(std::span<const EncodedSample>(d.dev));
  PinModel model(tiny_dims(d.vocab), {}, 2);
  Tape t0;
  const std::vector<double> before = output_values(model.forward(t0, batch, ForwardOptions::evaluation()));
  for (const Ablation &a : {Ablation{.no_slot2intent = true}, Ablation{.no_intent2slot = true},
                            Ablation{.no_cooperation = true}}) {
    model.set_ablation(a);
    Tape t1;
    CHECK_FALSE(bit_equal(output_values(model.forward(t1, batch, ForwardOptions::evaluation())), before));
    model.set_ablation({});
    Tape t2;
    CHECK(bit_equal(output_values(model.forward(t2, batch, ForwardOptions::evaluation())), before));
  }
  CHECK_THROWS(model.set_ablation({.no_gaussian_attention = true}));
}

TEST_CASE("every variant gives a finite loss") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto d = tiny_data(seed);
    UtteranceBatch batch = pad_batch(std::span<const EncodedSample>(d.train));
    for (const Ablation &a : kVariants) {
      PinModel model(tiny_dims(d.vocab), a, seed);
      Tape tape;
      ForwardOutput out = model.forward(tape, batch, ForwardOptions::evaluation());
      const double loss = model_loss(tape, out, batch, 0.5).total.item();
      CHECK(std::isfinite(loss));
      CHECK(loss > 0.0);
    }
  }
}

TEST_CASE("decoded predictions follow utterance lengths") {
  auto d = tiny_data();
  UtteranceBatch batch = pad_batch(std::span<const EncodedSample>(d.train));
  PinModel model(tiny_dims(d.vocab), {}, 1);
  Tape tape;
  DecodedBatch decoded = decode_predictions(model.forward(tape, batch, ForwardOptions::evaluation()), batch);
  REQUIRE(decoded.intents.size() == d.train.size());
  for (std::size_t b = 0; b < d.train.size(); ++b) {
    CHECK(decoded.slots[b].size() == d.train[b].words.size());
    CHECK(decoded.intents[b] >= 0);
    CHECK(decoded.intents[b] < static_cast<int>(d.vocab.intents.size()));
  }
}

TEST_CASE("model gradients match finite differences") {
  const UtteranceBatch batch = gradcheck_batch();
  PinModel model = gradcheck_model({}, 1);
  for (const GroupCheck &g : check_model_gradients(model, batch)) {
    CAPTURE(g.group);
    CHECK(g.active);
    CHECK(g.max_error <= 1e-4);
  }
}

}  // namespace
}  // namespace pin
