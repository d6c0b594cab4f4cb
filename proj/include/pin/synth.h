// Seeded synthetic SLU corpora with a tunable intent/slot co-occurrence.
//
// Every intent owns `slot_types_per_intent` slot types and every slot type
// owns a private lexicon. An utterance picks an intent, then places slot spans
// of one or two tokens separated by filler words. With probability `purity` a
// span is drawn from the utterance intent's own lexicons; otherwise from the
// matching slot type of a different intent, and tagged with that type.

#ifndef PIN_SYNTH_H_
#define PIN_SYNTH_H_

#include <cstddef>
#include <cstdint>
#include <string>

#include "pin/data.h"

namespace pin {

struct SynthSpec {
  int n_intents = 5;
  int slot_types_per_intent = 3;
  int lexicon_size = 8;
  int filler_vocab = 40;
  int min_len = 4;
  int max_len = 12;
  std::size_t train_samples = 2000;
  std::size_t dev_samples = 200;
  std::size_t test_samples = 200;
  double purity = 1.0;
  std::uint64_t seed = 1;
};

// Throws std::invalid_argument for an inconsistent spec.
void validate(const SynthSpec &spec);

Corpus generate_synthetic(const SynthSpec &spec);

std::string intent_name(int intent);
std::string slot_type_name(int intent, int type);
std::string slot_word(int intent, int type, int entry);

// `key = value` lines, one per field.
std::string to_text(const SynthSpec &spec);

}  // namespace pin

#endif  // PIN_SYNTH_H_
