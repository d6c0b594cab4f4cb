// Corpus ingestion in the three-file SLU layout, vocabularies and batching.
//
// A corpus directory holds one subdirectory per split (train/, valid/,
// test/), each with seq.in (space-separated tokens), seq.out (space-separated
// BIO tags) and label (one intent per line).

#ifndef PIN_DATA_H_
#define PIN_DATA_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pin {

struct Sample {
  std::vector<std::string> tokens;
  std::vector<std::string> tags;
  std::string intent;

  bool operator==(const Sample &) const = default;
};

struct Corpus {
  std::vector<Sample> train;
  std::vector<Sample> dev;
  std::vector<Sample> test;
};

enum class Split { kTrain, kDev, kTest };

// Directory name of a split inside a corpus directory.
const char *split_dir(Split split);
std::optional<Split> parse_split(std::string_view name);
const std::vector<Sample> &split_of(const Corpus &corpus, Split split);

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// "O", "B-<type>" or "I-<type>" with a non-empty type.
bool is_valid_tag(std::string_view tag);

std::vector<Sample> load_split(const std::filesystem::path &dir);
Corpus load_corpus(const std::filesystem::path &dir);

void write_split(const std::vector<Sample> &samples, const std::filesystem::path &dir);
void write_corpus(const Corpus &corpus, const std::filesystem::path &dir);

inline constexpr int kPadId = 0;
inline constexpr int kUnknownId = 1;
// Label id at padded positions (and for unlabeled input); excluded from loss.
inline constexpr int kNoLabel = -1;

// String <-> dense id map with ids assigned in insertion order.
class LabelIndex {
 public:
  int add(const std::string &name);
  std::optional<int> find(std::string_view name) const;
  const std::string &name(int id) const { return names_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string> &names() const { return names_; }

  static LabelIndex from_names(const std::vector<std::string> &names);

  bool operator==(const LabelIndex &other) const { return names_ == other.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> ids_;
};

struct Vocab {
  LabelIndex words;  // id 0 = "<pad>", id 1 = "<unk>"
  LabelIndex tags;
  LabelIndex intents;

  // Case-folded lookup; unseen words map to kUnknownId.
  int word_id(std::string_view word) const;
};

std::string fold_case(std::string_view word);

// Words from the training split only; tags and intents from every split.
Vocab build_vocabs(const Corpus &corpus);

// Sample mapped to ids. Labels the vocabulary does not know become kNoLabel.
struct EncodedSample {
  std::vector<int> words;
  std::vector<int> slots;
  int intent = kNoLabel;
};

EncodedSample encode(const Sample &sample, const Vocab &vocab);
std::vector<EncodedSample> encode_all(const std::vector<Sample> &samples, const Vocab &vocab);

// Row-major [batch x max_len] matrices padded to the longest utterance.
struct UtteranceBatch {
  std::size_t batch = 0;
  std::size_t max_len = 0;
  std::vector<int> tokens;
  std::vector<std::size_t> lengths;
  std::vector<int> slots;
  std::vector<int> intents;
  std::vector<std::uint8_t> mask;

  int token(std::size_t b, std::size_t t) const { return tokens[b * max_len + t]; }
  int slot(std::size_t b, std::size_t t) const { return slots[b * max_len + t]; }
  bool valid(std::size_t b, std::size_t t) const { return mask[b * max_len + t] != 0; }
};

UtteranceBatch pad_batch(std::span<const EncodedSample *const> samples);
UtteranceBatch pad_batch(std::span<const EncodedSample> samples);
UtteranceBatch pad_batch(std::span<const Sample> samples, const Vocab &vocab);

}  // namespace pin

#endif  // PIN_DATA_H_
