#include <cmath>
#include <limits>

#include "doctest.h"
#include "pin/checkpoint.h"
#include "pin/loss.h"
#include "pin/trainer.h"
#include "test_util.h"

namespace pin {
namespace {

using testing::bit_equal;
using testing::tiny_data;

TrainConfig small_config() {
  TrainConfig c;
  c.emb_dim = 8;
  c.hidden = 8;
  c.batch_size = 4;
  c.max_epochs = 3;
  return c;
}

std::vector<double> losses(const TrainResult &r) {
  std::vector<double> v;
  for (const EpochRecord &e : r.history) v.push_back(e.train_loss);
  return v;
}

TEST_CASE("config validation") {
  TrainConfig c;
  CHECK_NOTHROW(validate(c));
  c.lambda = 1.5;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = {};
  c.batch_size = 0;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = {};
  c.dropout = 1.0;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = {};
  c.teacher_forcing = -0.1;
  CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("training is deterministic") {
  auto d = tiny_data(1, 16);
  const TrainConfig c = small_config();
  PinModel a = make_model(c, d.vocab), b = make_model(c, d.vocab);
  const TrainResult ra = train(a, d.train, d.dev, d.vocab, c);
  const TrainResult rb = train(b, d.train, d.dev, d.vocab, c);
  CHECK(bit_equal(losses(ra), losses(rb)));
  for (std::size_t i = 0; i < ra.history.size(); ++i) CHECK(to_text(ra.history[i].dev) == to_text(rb.history[i].dev));
  const auto pa = a.parameters(), pb = b.parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(bit_equal(pa[i].tensor.values(), pb[i].tensor.values()));

  TrainConfig other = c;
  other.seed = 2;
  PinModel m = make_model(other, d.vocab);
  CHECK_FALSE(bit_equal(losses(train(m, d.train, d.dev, d.vocab, other)), losses(ra)));
}

TEST_CASE("overfits four utterances") {
  const Corpus corpus = testing::overfit_corpus();
  const Vocab vocab = build_vocabs(corpus);
  const auto train_set = encode_all(corpus.train, vocab);
  const TrainConfig c = testing::overfit_config();
  PinModel model = make_model(c, vocab);
  const UtteranceBatch all = pad_batch(std::span<const EncodedSample>(train_set));
  double last = std::numeric_limits<double>::infinity();
  std::size_t epochs = 0;
  train(model, train_set, {}, vocab, c, [&](const EpochRecord &r) {
    epochs = r.epoch;
    last = batch_loss(model, all, c.lambda);
    return last >= 0.01;
  });
  MESSAGE("epochs " << epochs << " loss " << last);
  CHECK(last < 0.01);
  CHECK(evaluate_model(model, train_set, vocab).sentence_accuracy == 1.0);
}

TEST_CASE("early stopping and best snapshot") {
  auto d = tiny_data(2, 16);
  TrainConfig c = small_config();
  c.max_epochs = 12;
  c.patience = 0;
  PinModel model = make_model(c, d.vocab);
  const TrainResult r = train(model, d.train, d.dev, d.vocab, c);
  REQUIRE(!r.history.empty());
  if (r.early_stopped) {
    CHECK_FALSE(r.history.back().improved);
    for (std::size_t i = 0; i + 1 < r.history.size(); ++i) CHECK(r.history[i].improved);
  }
  double best = -1.0;
  std::size_t best_epoch = 0;
  for (const EpochRecord &e : r.history) {
    if (e.dev.sentence_accuracy > best) {
      best = e.dev.sentence_accuracy;
      best_epoch = e.epoch;
    }
  }
  CHECK(r.best_epoch == best_epoch);
  CHECK(r.best_dev.sentence_accuracy == best);
  CHECK(to_text(evaluate_model(model, d.dev, d.vocab)) == to_text(r.best_dev));
}

TEST_CASE("patience zero stops at the first epoch without improvement") {
  auto d = tiny_data(3, 8);
  TrainConfig c = small_config();
  c.max_epochs = 50;
  c.patience = 0;
  c.learning_rate = 1e-9;
  PinModel model = make_model(c, d.vocab);
  const TrainResult r = train(model, d.train, d.dev, d.vocab, c);
  CHECK(r.early_stopped);
  CHECK(r.history.size() == 2);
  CHECK(r.best_epoch == 1);
}

TEST_CASE("callback can stop training") {
  auto d = tiny_data(1, 8);
  TrainConfig c = small_config();
  PinModel model = make_model(c, d.vocab);
  const TrainResult r = train(model, d.train, d.dev, d.vocab, c, [](const EpochRecord &) { return false; });
  CHECK(r.history.size() == 1);
}

TEST_CASE("non-finite values abort training") {
  auto d = tiny_data(1, 8);
  TrainConfig c = small_config();
  PinModel model = make_model(c, d.vocab);
  model.cooperation.intent_output.values()[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(train(model, d.train, d.dev, d.vocab, c), NonFiniteError);
}

TEST_CASE("padding does not change the loss") {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    auto d = tiny_data(100 + static_cast<std::uint64_t>(trial), 6);
    TrainConfig c = small_config();
    c.seed = static_cast<std::uint64_t>(trial + 1);
    PinModel model = make_model(c, d.vocab);
    const double batched = batch_loss(model, pad_batch(std::span<const EncodedSample>(d.train)), 0.5);
    double separate = 0.0;
    for (const EncodedSample &s : d.train) separate += batch_loss(model, pad_batch(std::span<const EncodedSample>(&s, 1)), 0.5);
    CHECK(std::abs(batched - separate) <= 1e-10);
  }
}

}  // namespace
}  // namespace pin
