#include "pin/trainer.h"

#include <cmath>
#include <numeric>

#include "pin/loss.h"
#include "pin/optimizer.h"
#include "pin/rng.h"

namespace pin {

namespace {

void require(bool ok, const std::string &what) {
  if (!ok) throw ConfigError("invalid configuration: " + what);
}

std::vector<std::vector<double>> snapshot(const std::vector<NamedParam> &params) {
  std::vector<std::vector<double>> out;
  out.reserve(params.size());
  for (const NamedParam &p : params) out.emplace_back(p.tensor.values().begin(), p.tensor.values().end());
  return out;
}

void restore(const std::vector<NamedParam> &params, const std::vector<std::vector<double>> &values) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor t = params[i].tensor;
    std::copy(values[i].begin(), values[i].end(), t.values().begin());
  }
}

void check_finite(const Tape &tape, const std::vector<NamedParam> &params) {
  if (auto bad = tape.first_non_finite()) throw NonFiniteError("non-finite value in " + *bad);
  for (const NamedParam &p : params) {
    for (double g : p.tensor.grad()) {
      if (!std::isfinite(g)) throw NonFiniteError("non-finite gradient in " + p.name);
    }
  }
}

std::vector<std::string> decode_tags(const std::vector<int> &ids, const Vocab &vocab) {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int id : ids) out.push_back(vocab.tags.name(static_cast<std::size_t>(id)));
  return out;
}

}  // namespace

void validate(const TrainConfig &c) {
  require(c.learning_rate > 0.0 && std::isfinite(c.learning_rate), "learning_rate must be positive");
  require(c.l2_decay >= 0.0 && std::isfinite(c.l2_decay), "l2_decay must be non-negative");
  require(c.batch_size > 0, "batch_size must be positive");
  require(c.teacher_forcing >= 0.0 && c.teacher_forcing <= 1.0, "teacher_forcing must lie in [0, 1]");
  require(c.dropout >= 0.0 && c.dropout < 1.0, "dropout must lie in [0, 1)");
  require(c.lambda >= 0.0 && c.lambda <= 1.0, "lambda must lie in [0, 1]");
  require(c.max_epochs > 0, "max_epochs must be positive");
  require(c.emb_dim > 0, "emb_dim must be positive");
  require(c.hidden > 0, "hidden must be positive");
}

PinModel make_model(const TrainConfig &config, const Vocab &vocab) {
  ModelDims dims;
  dims.vocab = vocab.words.size();
  dims.emb_dim = config.emb_dim;
  dims.hidden = config.hidden;
  dims.n_slots = vocab.tags.size();
  dims.n_intents = vocab.intents.size();
  return PinModel(dims, config.ablation, config.seed);
}

double batch_loss(const PinModel &model, const UtteranceBatch &batch, double lambda) {
  Tape tape;
  ForwardOutput out = model.forward(tape, batch, ForwardOptions::evaluation());
  return model_loss(tape, out, batch, lambda).total.item();
}

Predictions predict(const PinModel &model, const std::vector<EncodedSample> &samples, const Vocab &vocab,
                    std::size_t batch_size) {
  Predictions result;
  for (std::size_t begin = 0; begin < samples.size(); begin += batch_size) {
    const std::size_t n = std::min(batch_size, samples.size() - begin);
    UtteranceBatch batch = pad_batch(std::span<const EncodedSample>(samples.data() + begin, n));
    Tape tape;
    ForwardOutput out = model.forward(tape, batch, ForwardOptions::evaluation());
    DecodedBatch decoded = decode_predictions(out, batch);
    for (std::size_t b = 0; b < n; ++b) {
      result.intents.push_back(vocab.intents.name(static_cast<std::size_t>(decoded.intents[b])));
      result.tags.push_back(decode_tags(decoded.slots[b], vocab));
    }
  }
  return result;
}

MetricsReport evaluate_model(const PinModel &model, const std::vector<EncodedSample> &samples,
                             const Vocab &vocab, std::size_t batch_size) {
  Predictions pred = predict(model, samples, vocab, batch_size);
  std::vector<std::string> gold_intents;
  TagSequences gold_tags;
  for (const EncodedSample &s : samples) {
    gold_intents.push_back(s.intent == kNoLabel ? std::string() : vocab.intents.name(static_cast<std::size_t>(s.intent)));
    std::vector<std::string> tags;
    for (int id : s.slots) tags.push_back(id == kNoLabel ? std::string("O") : vocab.tags.name(static_cast<std::size_t>(id)));
    gold_tags.push_back(std::move(tags));
  }
  return evaluate(gold_intents, gold_tags, pred.intents, pred.tags);
}

TrainResult train(PinModel &model, const std::vector<EncodedSample> &train_set,
                  const std::vector<EncodedSample> &dev_set, const Vocab &vocab, const TrainConfig &config,
                  const EpochCallback &on_epoch) {
  validate(config);
  if (train_set.empty()) throw ConfigError("invalid configuration: training set is empty");

  Rng shuffle_rng(config.seed);
  Rng noise_rng = Rng(config.seed).derive(2);
  const std::vector<NamedParam> params = model.active_parameters();
  std::vector<Tensor> tensors = model.active_tensors();
  AdamState adam = AdamState::for_params(tensors);

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  ForwardOptions options;
  options.training = true;
  options.dropout_rate = config.dropout;
  options.teacher_forcing_rate = config.teacher_forcing;
  options.rng = &noise_rng;

  TrainResult result;
  std::vector<std::vector<double>> best = snapshot(params);
  double best_score = -1.0;
  std::size_t since_improvement = 0;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order.begin(), order.end());
    double epoch_loss = 0.0;
    std::vector<const EncodedSample *> members;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      members.clear();
      for (std::size_t i = begin; i < end; ++i) members.push_back(&train_set[order[i]]);
      UtteranceBatch batch = pad_batch(std::span<const EncodedSample *const>(members));

      model.zero_grad();
      Tape tape;
      ForwardOutput out = model.forward(tape, batch, options);
      BatchLoss loss = model_loss(tape, out, batch, config.lambda);
      tape.backward(loss.total);
      check_finite(tape, params);
      adam_step(tensors, adam, config.learning_rate, config.l2_decay);
      model.rezero_pad();
      epoch_loss += loss.total.item();
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = epoch_loss / static_cast<double>(train_set.size());
    record.dev = dev_set.empty() ? MetricsReport{} : evaluate_model(model, dev_set, vocab);
    // Without a dev set there is nothing to select on; every epoch counts.
    record.improved = dev_set.empty() || record.dev.sentence_accuracy > best_score;
    if (record.improved) {
      best_score = record.dev.sentence_accuracy;
      best = snapshot(params);
      result.best_epoch = epoch;
      result.best_dev = record.dev;
      since_improvement = 0;
    } else {
      ++since_improvement;
    }
    result.history.push_back(record);
    if (on_epoch && !on_epoch(record)) break;
    if (since_improvement > config.patience) {
      result.early_stopped = true;
      break;
    }
  }
  restore(params, best);
  return result;
}

}  // namespace pin
