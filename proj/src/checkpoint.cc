#include "pin/checkpoint.h"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace pin {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

namespace {

constexpr char kMagic[8] = {'P', 'I', 'N', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  explicit Writer(std::ostream &out) : out_(out) {}
  template <typename T>
  void pod(T v) {
    out_.write(reinterpret_cast<const char *>(&v), sizeof(T));
  }
  void bytes(const std::string &s) {
    pod<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

 private:
  std::ostream &out_;
};

class Reader {
 public:
  Reader(std::istream &in, std::string path) : in_(in), path_(std::move(path)) {}
  template <typename T>
  T pod() {
    T v;
    in_.read(reinterpret_cast<char *>(&v), sizeof(T));
    if (!in_) fail("truncated file");
    return v;
  }
  std::string bytes(std::size_t n) {
    std::string s(n, '\0');
    in_.read(s.data(), static_cast<std::streamsize>(n));
    if (!in_) fail("truncated file");
    return s;
  }
  std::string string() { return bytes(pod<std::uint32_t>()); }
  [[noreturn]] void fail(const std::string &what) {
    throw CheckpointError("checkpoint " + path_ + ": " + what);
  }

 private:
  std::istream &in_;
  std::string path_;
};

void write_labels(Writer &w, const LabelIndex &index) {
  w.pod<std::uint32_t>(static_cast<std::uint32_t>(index.size()));
  for (const std::string &n : index.names()) w.bytes(n);
}

LabelIndex read_labels(Reader &r) {
  const auto count = r.pod<std::uint32_t>();
  std::vector<std::string> names;
  names.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) names.push_back(r.string());
  LabelIndex index = LabelIndex::from_names(names);
  if (index.size() != names.size()) r.fail("duplicate label in label list");
  return index;
}

std::string header_text(const ConfigEntries &entries) {
  std::string out;
  for (const auto &[k, v] : entries) out += k + " = " + v + "\n";
  return out;
}

ConfigEntries parse_header(const std::string &text) {
  ConfigEntries out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    out.emplace_back(line.substr(0, eq), line.substr(eq + 3));
  }
  return out;
}

}  // namespace

const std::string &Checkpoint::get(const std::string &key) const {
  for (const auto &[k, v] : header)
    if (k == key) return v;
  throw CheckpointError("checkpoint header lacks '" + key + "'");
}

ModelDims Checkpoint::dims() const {
  ModelDims d;
  d.vocab = std::stoull(get("model.vocab"));
  d.emb_dim = std::stoull(get("model.emb_dim"));
  d.hidden = std::stoull(get("model.hidden"));
  d.n_slots = std::stoull(get("model.n_slots"));
  d.n_intents = std::stoull(get("model.n_intents"));
  return d;
}

Ablation Checkpoint::ablation() const {
  Ablation a;
  a.no_slot2intent = get("model.no_slot2intent") == "true";
  a.no_intent2slot = get("model.no_intent2slot") == "true";
  a.no_gaussian_attention = get("model.no_gaussian_attention") == "true";
  a.no_cooperation = get("model.no_cooperation") == "true";
  return a;
}

std::uint64_t Checkpoint::seed() const { return std::stoull(get("model.seed")); }

Checkpoint make_checkpoint(const PinModel &model, const Vocab &vocab, const ConfigEntries &config,
                           std::uint64_t seed) {
  Checkpoint c;
  c.header = config;
  const ModelDims &d = model.dims();
  const Ablation &a = model.ablation();
  auto flag = [](bool b) { return std::string(b ? "true" : "false"); };
  c.header.emplace_back("model.vocab", std::to_string(d.vocab));
  c.header.emplace_back("model.emb_dim", std::to_string(d.emb_dim));
  c.header.emplace_back("model.hidden", std::to_string(d.hidden));
  c.header.emplace_back("model.n_slots", std::to_string(d.n_slots));
  c.header.emplace_back("model.n_intents", std::to_string(d.n_intents));
  c.header.emplace_back("model.no_slot2intent", flag(a.no_slot2intent));
  c.header.emplace_back("model.no_intent2slot", flag(a.no_intent2slot));
  c.header.emplace_back("model.no_gaussian_attention", flag(a.no_gaussian_attention));
  c.header.emplace_back("model.no_cooperation", flag(a.no_cooperation));
  c.header.emplace_back("model.seed", std::to_string(seed));
  c.vocab = vocab;
  for (const NamedParam &p : model.active_parameters()) c.tensors.emplace_back(p.name, p.tensor.clone());
  return c;
}

void write_checkpoint(const std::filesystem::path &path, const Checkpoint &ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write checkpoint " + path.string());
  Writer w(out);
  out.write(kMagic, sizeof(kMagic));
  w.pod<std::uint32_t>(kVersion);
  const std::string header = header_text(ckpt.header);
  w.pod<std::uint64_t>(header.size());
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  write_labels(w, ckpt.vocab.words);
  write_labels(w, ckpt.vocab.tags);
  write_labels(w, ckpt.vocab.intents);
  w.pod<std::uint32_t>(static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto &[name, t] : ckpt.tensors) {
    w.bytes(name);
    w.pod<std::uint32_t>(static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) w.pod<std::uint64_t>(d);
    out.write(reinterpret_cast<const char *>(t.data()),
              static_cast<std::streamsize>(t.size() * sizeof(double)));
  }
  if (!out) throw CheckpointError("write failed for checkpoint " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  Reader r(in, path.string());
  const std::string magic = r.bytes(sizeof(kMagic));
  if (std::memcmp(magic.data(), kMagic, sizeof(kMagic)) != 0) r.fail("bad magic");
  if (r.pod<std::uint32_t>() != kVersion) r.fail("unsupported version");
  Checkpoint c;
  c.header = parse_header(r.bytes(r.pod<std::uint64_t>()));
  c.vocab.words = read_labels(r);
  c.vocab.tags = read_labels(r);
  c.vocab.intents = read_labels(r);
  const auto count = r.pod<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = r.string();
    const auto rank = r.pod<std::uint32_t>();
    if (rank > 8) r.fail("tensor '" + name + "' has implausible rank");
    Shape shape;
    for (std::uint32_t k = 0; k < rank; ++k) shape.push_back(r.pod<std::uint64_t>());
    std::vector<double> values(shape_size(shape));
    in.read(reinterpret_cast<char *>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!in) r.fail("truncated tensor '" + name + "'");
    c.tensors.emplace_back(std::move(name), Tensor::from(std::move(shape), std::move(values), true));
  }
  return c;
}

PinModel restore_model(const Checkpoint &ckpt) {
  const ModelDims dims = ckpt.dims();
  auto require_size = [](const char *dim, std::size_t header, std::size_t labels) {
    if (header != labels) {
      throw CheckpointError(std::string("checkpoint ") + dim + " is " + std::to_string(header) +
                            " but its label list has " + std::to_string(labels) + " entries");
    }
  };
  require_size("model.vocab", dims.vocab, ckpt.vocab.words.size());
  require_size("model.n_slots", dims.n_slots, ckpt.vocab.tags.size());
  require_size("model.n_intents", dims.n_intents, ckpt.vocab.intents.size());
  PinModel model(dims, ckpt.ablation(), ckpt.seed());
  std::map<std::string, const Tensor *> stored;
  for (const auto &[name, t] : ckpt.tensors) stored[name] = &t;
  for (NamedParam &p : model.active_parameters()) {
    auto it = stored.find(p.name);
    if (it == stored.end()) throw CheckpointError("checkpoint lacks tensor '" + p.name + "'");
    const Tensor &src = *it->second;
    if (src.shape() != p.tensor.shape()) {
      throw CheckpointError("tensor '" + p.name + "' has shape " + shape_string(src.shape()) +
                            ", model expects " + shape_string(p.tensor.shape()));
    }
    std::copy(src.values().begin(), src.values().end(), p.tensor.values().begin());
  }
  return model;
}

void check_compatible(const Checkpoint &ckpt, const std::vector<Sample> &samples) {
  for (const Sample &s : samples) {
    if (!ckpt.vocab.intents.find(s.intent)) {
      throw CheckpointError("model.n_intents mismatch: intent '" + s.intent + "' is not among the checkpoint's " +
                            std::to_string(ckpt.vocab.intents.size()) + " intents");
    }
    for (const std::string &tag : s.tags) {
      if (!ckpt.vocab.tags.find(tag)) {
        throw CheckpointError("model.n_slots mismatch: tag '" + tag + "' is not among the checkpoint's " +
                              std::to_string(ckpt.vocab.tags.size()) + " slot tags");
      }
    }
  }
}

}  // namespace pin
