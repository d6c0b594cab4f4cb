#ifndef PIN_TRAINER_H_
#define PIN_TRAINER_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pin/data.h"
#include "pin/metrics.h"
#include "pin/model.h"

namespace pin {

struct TrainConfig {
  double learning_rate = 0.001;
  double l2_decay = 1e-6;
  std::size_t batch_size = 16;
  double teacher_forcing = 0.9;
  double dropout = 0.4;
  double lambda = 0.5;
  std::size_t max_epochs = 100;
  std::size_t patience = 10;
  std::uint64_t seed = 1;
  std::size_t emb_dim = 512;
  std::size_t hidden = 256;
  Ablation ablation;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws ConfigError naming the first out-of-range field.
void validate(const TrainConfig &config);

class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  MetricsReport dev;
  bool improved = false;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  MetricsReport best_dev;
  bool early_stopped = false;
};

// Called after each epoch; returning false stops training.
using EpochCallback = std::function<bool(const EpochRecord &)>;

// Trains in place. The model ends holding the parameters of the epoch with the
// best dev sentence accuracy (ties keep the earlier epoch). Training stops once
// more than `patience` epochs pass without improvement. With an empty dev set
// the model keeps the parameters of the last epoch.
TrainResult train(PinModel &model, const std::vector<EncodedSample> &train_set,
                  const std::vector<EncodedSample> &dev_set, const Vocab &vocab, const TrainConfig &config,
                  const EpochCallback &on_epoch = {});

struct Predictions {
  std::vector<std::string> intents;
  TagSequences tags;
};

Predictions predict(const PinModel &model, const std::vector<EncodedSample> &samples, const Vocab &vocab,
                    std::size_t batch_size = 64);

MetricsReport evaluate_model(const PinModel &model, const std::vector<EncodedSample> &samples,
                             const Vocab &vocab, std::size_t batch_size = 64);

// Summed joint loss over a batch in evaluation mode.
double batch_loss(const PinModel &model, const UtteranceBatch &batch, double lambda);

// Builds a freshly initialised model sized for the vocabulary.
PinModel make_model(const TrainConfig &config, const Vocab &vocab);

}  // namespace pin

#endif  // PIN_TRAINER_H_
