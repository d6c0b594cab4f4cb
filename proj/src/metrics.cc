#include "pin/metrics.h"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

namespace pin {

namespace {

struct ParsedTag {
  char prefix;  // 'B', 'I' or 'O'
  std::string_view type;
};

ParsedTag parse_tag(std::string_view tag) {
  if (tag.size() > 2 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-')
    return {tag[0], tag.substr(2)};
  return {'O', {}};
}

void require_aligned(std::size_t a, std::size_t b, const char *what) {
  if (a != b) {
    throw std::invalid_argument(std::string(what) + ": " + std::to_string(a) + " gold vs " +
                                std::to_string(b) + " predicted");
  }
}

}  // namespace

std::vector<Chunk> extract_chunks(std::span<const std::string> tags) {
  std::vector<Chunk> chunks;
  bool open = false;
  Chunk current;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const ParsedTag tag = parse_tag(tags[i]);
    const bool continues = open && tag.prefix == 'I' && tag.type == current.type;
    if (open && !continues) {
      chunks.push_back(current);
      open = false;
    }
    if (tag.prefix == 'O') continue;
    if (continues) {
      current.end = i;
    } else {
      current = Chunk{std::string(tag.type), i, i};
      open = true;
    }
  }
  if (open) chunks.push_back(current);
  return chunks;
}

SlotScores slot_f1(const TagSequences &gold, const TagSequences &predicted) {
  require_aligned(gold.size(), predicted.size(), "slot_f1 utterance count");
  SlotScores s;
  for (std::size_t u = 0; u < gold.size(); ++u) {
    require_aligned(gold[u].size(), predicted[u].size(),
                    ("slot_f1 length of utterance " + std::to_string(u)).c_str());
    auto g = extract_chunks(gold[u]);
    auto p = extract_chunks(predicted[u]);
    s.gold_chunks += g.size();
    s.predicted_chunks += p.size();
    // Chunks never overlap, so neither list has duplicates.
    std::sort(g.begin(), g.end());
    std::sort(p.begin(), p.end());
    std::vector<Chunk> common;
    std::set_intersection(g.begin(), g.end(), p.begin(), p.end(), std::back_inserter(common));
    s.matched_chunks += common.size();
  }
  s.precision = s.predicted_chunks > 0
                    ? static_cast<double>(s.matched_chunks) / static_cast<double>(s.predicted_chunks)
                    : 0.0;
  s.recall = s.gold_chunks > 0
                 ? static_cast<double>(s.matched_chunks) / static_cast<double>(s.gold_chunks)
                 : 0.0;
  s.f1 = s.precision + s.recall > 0.0
             ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
             : 0.0;
  return s;
}

double intent_error_rate(std::span<const std::string> gold, std::span<const std::string> predicted) {
  require_aligned(gold.size(), predicted.size(), "intent_error_rate");
  if (gold.empty()) throw std::invalid_argument("intent_error_rate: no utterances");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) wrong += gold[i] != predicted[i];
  return static_cast<double>(wrong) / static_cast<double>(gold.size());
}

double sentence_accuracy(std::span<const std::string> gold_intents, const TagSequences &gold_tags,
                         std::span<const std::string> predicted_intents,
                         const TagSequences &predicted_tags) {
  require_aligned(gold_intents.size(), predicted_intents.size(), "sentence_accuracy");
  require_aligned(gold_tags.size(), predicted_tags.size(), "sentence_accuracy");
  require_aligned(gold_intents.size(), gold_tags.size(), "sentence_accuracy intents vs tags");
  if (gold_intents.empty()) throw std::invalid_argument("sentence_accuracy: no utterances");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < gold_intents.size(); ++i)
    correct += gold_intents[i] == predicted_intents[i] && gold_tags[i] == predicted_tags[i];
  return static_cast<double>(correct) / static_cast<double>(gold_intents.size());
}

MetricsReport evaluate(std::span<const std::string> gold_intents, const TagSequences &gold_tags,
                       std::span<const std::string> predicted_intents,
                       const TagSequences &predicted_tags) {
  MetricsReport r;
  r.intent_error_rate = intent_error_rate(gold_intents, predicted_intents);
  const SlotScores s = slot_f1(gold_tags, predicted_tags);
  r.slot_precision = s.precision;
  r.slot_recall = s.recall;
  r.slot_f1 = s.f1;
  r.sentence_accuracy = sentence_accuracy(gold_intents, gold_tags, predicted_intents, predicted_tags);
  r.utterances = gold_intents.size();
  r.gold_chunks = s.gold_chunks;
  r.predicted_chunks = s.predicted_chunks;
  r.matched_chunks = s.matched_chunks;
  return r;
}

std::string to_text(const MetricsReport &r) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "intent_error_rate = %.6f\n"
                "slot_precision = %.6f\n"
                "slot_recall = %.6f\n"
                "slot_f1 = %.6f\n"
                "sentence_accuracy = %.6f\n"
                "utterances = %zu\n"
                "gold_chunks = %zu\n"
                "predicted_chunks = %zu\n"
                "matched_chunks = %zu\n",
                r.intent_error_rate, r.slot_precision, r.slot_recall, r.slot_f1,
                r.sentence_accuracy, r.utterances, r.gold_chunks, r.predicted_chunks,
                r.matched_chunks);
  return buf;
}

MetricsReport parse_report(const std::string &text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto strip = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
      return s;
    };
    kv[strip(line.substr(0, eq))] = strip(line.substr(eq + 1));
  }
  auto num = [&](const char *key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw std::invalid_argument(std::string("metrics report lacks ") + key);
    return std::stod(it->second);
  };
  MetricsReport r;
  r.intent_error_rate = num("intent_error_rate");
  r.slot_precision = num("slot_precision");
  r.slot_recall = num("slot_recall");
  r.slot_f1 = num("slot_f1");
  r.sentence_accuracy = num("sentence_accuracy");
  r.utterances = static_cast<std::size_t>(num("utterances"));
  r.gold_chunks = static_cast<std::size_t>(num("gold_chunks"));
  r.predicted_chunks = static_cast<std::size_t>(num("predicted_chunks"));
  r.matched_chunks = static_cast<std::size_t>(num("matched_chunks"));
  return r;
}

}  // namespace pin
