// Binary checkpoint container.
//
// Layout (little-endian):
//   "PINCKPT\0"                    8-byte magic
//   u32 version                    = 1
//   u64 n, n bytes                 header: `key = value` lines (run config,
//                                  seed, model dimensions and ablation flags)
//   3 x label list                 words, slot tags, intents; each
//                                  u32 count then (u32 len, bytes) per entry
//   u32 tensor count, then per tensor:
//     u32 len, name bytes; u32 rank; u64 dims[rank]; f64 values[prod(dims)]
//
// Only parameters used by the recorded ablation are stored.

#ifndef PIN_CHECKPOINT_H_
#define PIN_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pin/data.h"
#include "pin/model.h"

namespace pin {

using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

struct Checkpoint {
  ConfigEntries header;
  Vocab vocab;
  std::vector<std::pair<std::string, Tensor>> tensors;

  // Header lookups; throws CheckpointError if the key is absent.
  const std::string &get(const std::string &key) const;
  ModelDims dims() const;
  Ablation ablation() const;
  std::uint64_t seed() const;
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Adds model.* keys (dimensions, ablation, seed) after the caller's entries.
Checkpoint make_checkpoint(const PinModel &model, const Vocab &vocab, const ConfigEntries &config,
                           std::uint64_t seed);

void write_checkpoint(const std::filesystem::path &path, const Checkpoint &ckpt);
Checkpoint read_checkpoint(const std::filesystem::path &path);

// Rebuilds the model and copies stored tensors into it. Fails on a missing
// active tensor or a shape mismatch, naming the tensor and both shapes.
PinModel restore_model(const Checkpoint &ckpt);

// Fails if the samples use an intent or slot tag the checkpoint was not
// trained with, naming the dimension and the label.
void check_compatible(const Checkpoint &ckpt, const std::vector<Sample> &samples);

}  // namespace pin

#endif  // PIN_CHECKPOINT_H_
