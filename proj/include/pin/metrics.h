// Intent error rate, chunk-level slot F1 and sentence-level frame accuracy.

#ifndef PIN_METRICS_H_
#define PIN_METRICS_H_

#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace pin {

struct Chunk {
  std::string type;
  std::size_t start = 0;
  std::size_t end = 0;  // inclusive

  auto operator<=>(const Chunk &) const = default;
};

// Chunks of a BIO sequence under conlleval rules: B-X opens a chunk, I-X
// continues an open chunk of type X and otherwise opens one, O or a type
// change closes. Malformed tags count as O. Sorted by start.
std::vector<Chunk> extract_chunks(std::span<const std::string> tags);

struct SlotScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t gold_chunks = 0;
  std::size_t predicted_chunks = 0;
  std::size_t matched_chunks = 0;
};

using TagSequences = std::vector<std::vector<std::string>>;

// Micro-averaged exact-match chunk scores. P is 0 with no predicted chunks,
// R is 0 with no gold chunks, F1 is 0 when P + R is 0.
SlotScores slot_f1(const TagSequences &gold, const TagSequences &predicted);

double intent_error_rate(std::span<const std::string> gold, std::span<const std::string> predicted);

// Fraction of utterances whose intent and full tag sequence are both right.
double sentence_accuracy(std::span<const std::string> gold_intents, const TagSequences &gold_tags,
                         std::span<const std::string> predicted_intents,
                         const TagSequences &predicted_tags);

struct MetricsReport {
  double intent_error_rate = 0.0;
  double slot_precision = 0.0;
  double slot_recall = 0.0;
  double slot_f1 = 0.0;
  double sentence_accuracy = 0.0;
  std::size_t utterances = 0;
  std::size_t gold_chunks = 0;
  std::size_t predicted_chunks = 0;
  std::size_t matched_chunks = 0;
};

MetricsReport evaluate(std::span<const std::string> gold_intents, const TagSequences &gold_tags,
                       std::span<const std::string> predicted_intents,
                       const TagSequences &predicted_tags);

// One `metric = value` line per field.
std::string to_text(const MetricsReport &report);
MetricsReport parse_report(const std::string &text);

}  // namespace pin

#endif  // PIN_METRICS_H_
