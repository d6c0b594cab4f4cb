#include "pin/synth.h"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "pin/rng.h"

namespace pin {

namespace {

struct Span {
  int owner;  // intent whose lexicon supplies the words
  int type;
  int length;
};

Sample make_utterance(const SynthSpec &spec, Rng &rng) {
  Sample s;
  const int intent = static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.n_intents)));
  s.intent = intent_name(intent);
  int length = static_cast<int>(rng.between(spec.min_len, spec.max_len));

  std::vector<int> types(static_cast<std::size_t>(spec.slot_types_per_intent));
  std::iota(types.begin(), types.end(), 0);
  rng.shuffle(types.begin(), types.end());
  const int n_slots = static_cast<int>(rng.between(1, spec.slot_types_per_intent));

  std::vector<Span> spans;
  int slot_tokens = 0;
  for (int k = 0; k < n_slots; ++k) {
    Span span{intent, types[static_cast<std::size_t>(k)], static_cast<int>(rng.between(1, 2))};
    if (spec.n_intents > 1 && !rng.bernoulli(spec.purity)) {
      const int other = static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.n_intents - 1)));
      span.owner = other >= intent ? other + 1 : other;
    }
    // Spans are separated by at least one filler, so adjacent spans of one
    // type never occur and BIO boundaries stay recoverable.
    const int needed = slot_tokens + span.length + static_cast<int>(spans.size());
    if (needed > length) break;
    slot_tokens += span.length;
    spans.push_back(span);
  }

  const int gaps = static_cast<int>(spans.size()) + 1;
  std::vector<int> fillers(static_cast<std::size_t>(gaps), 0);
  for (int g = 1; g + 1 < gaps; ++g) fillers[static_cast<std::size_t>(g)] = 1;
  const int free_fillers = length - slot_tokens - std::max(0, gaps - 2);
  for (int f = 0; f < free_fillers; ++f)
    ++fillers[rng.below(static_cast<std::uint64_t>(gaps))];

  auto emit_fillers = [&](int count) {
    for (int f = 0; f < count; ++f) {
      s.tokens.push_back("f" + std::to_string(rng.below(static_cast<std::uint64_t>(spec.filler_vocab))));
      s.tags.emplace_back("O");
    }
  };
  for (std::size_t k = 0; k < spans.size(); ++k) {
    emit_fillers(fillers[k]);
    const Span &span = spans[k];
    const std::string type = slot_type_name(span.owner, span.type);
    for (int t = 0; t < span.length; ++t) {
      const int entry = static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.lexicon_size)));
      s.tokens.push_back(slot_word(span.owner, span.type, entry));
      s.tags.push_back((t == 0 ? "B-" : "I-") + type);
    }
  }
  emit_fillers(fillers.back());
  return s;
}

}  // namespace

void validate(const SynthSpec &spec) {
  if (spec.n_intents < 1 || spec.slot_types_per_intent < 1 || spec.lexicon_size < 1 ||
      spec.filler_vocab < 1) {
    throw std::invalid_argument("synthetic spec: counts must be positive");
  }
  if (spec.min_len < 2 || spec.max_len < spec.min_len) {
    throw std::invalid_argument("synthetic spec: need 2 <= min_len <= max_len");
  }
  if (!(spec.purity >= 0.0 && spec.purity <= 1.0)) {
    throw std::invalid_argument("synthetic spec: purity must be in [0, 1]");
  }
  if (spec.train_samples == 0) throw std::invalid_argument("synthetic spec: empty training split");
}

Corpus generate_synthetic(const SynthSpec &spec) {
  validate(spec);
  Rng rng(spec.seed);
  Corpus corpus;
  auto fill = [&](std::vector<Sample> &out, std::size_t n) {
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(make_utterance(spec, rng));
  };
  fill(corpus.train, spec.train_samples);
  fill(corpus.dev, spec.dev_samples);
  fill(corpus.test, spec.test_samples);
  return corpus;
}

std::string intent_name(int intent) { return "Intent" + std::to_string(intent); }

std::string slot_type_name(int intent, int type) {
  return "i" + std::to_string(intent) + "_slot" + std::to_string(type);
}

std::string slot_word(int intent, int type, int entry) {
  return "w" + std::to_string(intent) + "_" + std::to_string(type) + "_" + std::to_string(entry);
}

std::string to_text(const SynthSpec &spec) {
  std::ostringstream out;
  out << "n_intents = " << spec.n_intents << '\n'
      << "slot_types_per_intent = " << spec.slot_types_per_intent << '\n'
      << "lexicon_size = " << spec.lexicon_size << '\n'
      << "filler_vocab = " << spec.filler_vocab << '\n'
      << "min_len = " << spec.min_len << '\n'
      << "max_len = " << spec.max_len << '\n'
      << "train_samples = " << spec.train_samples << '\n'
      << "dev_samples = " << spec.dev_samples << '\n'
      << "test_samples = " << spec.test_samples << '\n'
      << "purity = " << spec.purity << '\n'
      << "seed = " << spec.seed << '\n';
  return out.str();
}

}  // namespace pin
