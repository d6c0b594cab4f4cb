#include "pin/data.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace pin {
namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  auto begin = std::find_if(s.begin(), s.end(), not_space);
  auto end = std::find_if(s.rbegin(), s.rend(), not_space).base();
  return begin < end ? std::string_view(&*begin, static_cast<std::size_t>(end - begin))
                     : std::string_view();
}

std::vector<std::string> split_spaces(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string> read_lines(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.emplace_back(trim(line));
  return lines;
}

std::string join(const std::vector<std::string> &parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += ' ';
    out += parts[i];
  }
  return out;
}

}  // namespace

const char *split_dir(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kDev:
      return "valid";
    case Split::kTest:
      return "test";
  }
  return "";
}

std::optional<Split> parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "valid" || name == "dev") return Split::kDev;
  if (name == "test") return Split::kTest;
  return std::nullopt;
}

const std::vector<Sample> &split_of(const Corpus &corpus, Split split) {
  switch (split) {
    case Split::kTrain:
      return corpus.train;
    case Split::kDev:
      return corpus.dev;
    case Split::kTest:
      return corpus.test;
  }
  return corpus.train;
}

bool is_valid_tag(std::string_view tag) {
  if (tag == "O") return true;
  return tag.size() > 2 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-';
}

std::vector<Sample> load_split(const fs::path &dir) {
  const fs::path in_path = dir / "seq.in", out_path = dir / "seq.out", label_path = dir / "label";
  const auto tokens = read_lines(in_path);
  const auto tags = read_lines(out_path);
  const auto labels = read_lines(label_path);
  if (tags.size() != tokens.size()) {
    throw CorpusError("line count mismatch: " + out_path.string() + " has " +
                      std::to_string(tags.size()) + " lines, seq.in has " +
                      std::to_string(tokens.size()));
  }
  if (labels.size() != tokens.size()) {
    throw CorpusError("line count mismatch: " + label_path.string() + " has " +
                      std::to_string(labels.size()) + " lines, seq.in has " +
                      std::to_string(tokens.size()));
  }
  std::vector<Sample> samples;
  samples.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string where = std::to_string(i + 1);
    Sample s{split_spaces(tokens[i]), split_spaces(tags[i]), labels[i]};
    if (s.tokens.empty()) throw CorpusError("empty utterance at " + in_path.string() + ":" + where);
    if (s.tokens.size() != s.tags.size()) {
      throw CorpusError("token/tag length mismatch at " + out_path.string() + ":" + where + " (" +
                        std::to_string(s.tokens.size()) + " tokens, " +
                        std::to_string(s.tags.size()) + " tags)");
    }
    for (const std::string &tag : s.tags) {
      if (!is_valid_tag(tag)) {
        throw CorpusError("malformed tag '" + tag + "' at " + out_path.string() + ":" + where);
      }
    }
    if (s.intent.empty()) throw CorpusError("empty intent at " + label_path.string() + ":" + where);
    samples.push_back(std::move(s));
  }
  return samples;
}

Corpus load_corpus(const fs::path &dir) {
  Corpus corpus;
  corpus.train = load_split(dir / split_dir(Split::kTrain));
  corpus.dev = load_split(dir / split_dir(Split::kDev));
  corpus.test = load_split(dir / split_dir(Split::kTest));
  return corpus;
}

void write_split(const std::vector<Sample> &samples, const fs::path &dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  std::ofstream in(dir / "seq.in", std::ios::binary);
  std::ofstream out(dir / "seq.out", std::ios::binary);
  std::ofstream label(dir / "label", std::ios::binary);
  if (!in || !out || !label) throw CorpusError("cannot write corpus files under " + dir.string());
  for (const Sample &s : samples) {
    in << join(s.tokens) << '\n';
    out << join(s.tags) << '\n';
    label << s.intent << '\n';
  }
  if (!in || !out || !label) throw CorpusError("write failed under " + dir.string());
}

void write_corpus(const Corpus &corpus, const fs::path &dir) {
  write_split(corpus.train, dir / split_dir(Split::kTrain));
  write_split(corpus.dev, dir / split_dir(Split::kDev));
  write_split(corpus.test, dir / split_dir(Split::kTest));
}

int LabelIndex::add(const std::string &name) {
  auto [it, inserted] = ids_.emplace(name, static_cast<int>(names_.size()));
  if (inserted) names_.push_back(name);
  return it->second;
}

std::optional<int> LabelIndex::find(std::string_view name) const {
  auto it = ids_.find(std::string(name));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

LabelIndex LabelIndex::from_names(const std::vector<std::string> &names) {
  LabelIndex index;
  for (const std::string &n : names) index.add(n);
  return index;
}

std::string fold_case(std::string_view word) {
  std::string out(word);
  for (char &c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

int Vocab::word_id(std::string_view word) const {
  return words.find(fold_case(word)).value_or(kUnknownId);
}

Vocab build_vocabs(const Corpus &corpus) {
  if (corpus.train.empty()) throw CorpusError("training split is empty");
  Vocab v;
  v.words.add("<pad>");
  v.words.add("<unk>");
  for (const Sample &s : corpus.train)
    for (const std::string &w : s.tokens) v.words.add(fold_case(w));
  for (const auto *split : {&corpus.train, &corpus.dev, &corpus.test}) {
    for (const Sample &s : *split) {
      for (const std::string &t : s.tags) v.tags.add(t);
      v.intents.add(s.intent);
    }
  }
  return v;
}

EncodedSample encode(const Sample &sample, const Vocab &vocab) {
  EncodedSample e;
  e.words.reserve(sample.tokens.size());
  for (const std::string &w : sample.tokens) e.words.push_back(vocab.word_id(w));
  e.slots.assign(sample.tokens.size(), kNoLabel);
  for (std::size_t i = 0; i < sample.tags.size() && i < e.slots.size(); ++i)
    e.slots[i] = vocab.tags.find(sample.tags[i]).value_or(kNoLabel);
  if (!sample.intent.empty()) e.intent = vocab.intents.find(sample.intent).value_or(kNoLabel);
  return e;
}

std::vector<EncodedSample> encode_all(const std::vector<Sample> &samples, const Vocab &vocab) {
  std::vector<EncodedSample> out;
  out.reserve(samples.size());
  for (const Sample &s : samples) out.push_back(encode(s, vocab));
  return out;
}

UtteranceBatch pad_batch(std::span<const EncodedSample *const> samples) {
  if (samples.empty()) throw std::invalid_argument("pad_batch: no samples");
  UtteranceBatch b;
  b.batch = samples.size();
  for (const EncodedSample *s : samples) b.max_len = std::max(b.max_len, s->words.size());
  b.tokens.assign(b.batch * b.max_len, kPadId);
  b.slots.assign(b.batch * b.max_len, kNoLabel);
  b.mask.assign(b.batch * b.max_len, 0);
  for (std::size_t i = 0; i < b.batch; ++i) {
    const EncodedSample &s = *samples[i];
    if (s.words.empty()) throw std::invalid_argument("pad_batch: empty utterance");
    b.lengths.push_back(s.words.size());
    b.intents.push_back(s.intent);
    for (std::size_t t = 0; t < s.words.size(); ++t) {
      b.tokens[i * b.max_len + t] = s.words[t];
      b.slots[i * b.max_len + t] = t < s.slots.size() ? s.slots[t] : kNoLabel;
      b.mask[i * b.max_len + t] = 1;
    }
  }
  return b;
}

UtteranceBatch pad_batch(std::span<const EncodedSample> samples) {
  std::vector<const EncodedSample *> ptrs;
  for (const EncodedSample &s : samples) ptrs.push_back(&s);
  return pad_batch(std::span<const EncodedSample *const>(ptrs));
}

UtteranceBatch pad_batch(std::span<const Sample> samples, const Vocab &vocab) {
  std::vector<EncodedSample> encoded;
  for (const Sample &s : samples) encoded.push_back(encode(s, vocab));
  return pad_batch(std::span<const EncodedSample>(encoded));
}

}  // namespace pin
