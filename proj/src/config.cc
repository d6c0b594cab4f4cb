#include "pin/config.h"

#include <charconv>
#include <fstream>
#include <sstream>

namespace pin {

namespace {

std::string trim(const std::string &s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
}

[[noreturn]] void bad_value(const std::string &key, const std::string &value, const char *expected) {
  throw ConfigError("config key '" + key + "': cannot read '" + value + "' as " + expected);
}

template <typename T>
T parse_number(const std::string &key, const std::string &value, const char *expected) {
  T out{};
  const char *end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value, expected);
  return out;
}

double parse_double(const std::string &key, const std::string &value) {
  return parse_number<double>(key, value, "a number");
}

std::size_t parse_size(const std::string &key, const std::string &value) {
  return parse_number<std::size_t>(key, value, "a non-negative integer");
}

bool parse_bool(const std::string &key, const std::string &value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key, value, "true or false");
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

const char *format_bool(bool v) { return v ? "true" : "false"; }

}  // namespace

const std::vector<std::string> &config_keys() {
  static const std::vector<std::string> keys{
      "data",           "output",         "learning_rate", "l2_decay",       "batch_size",
      "teacher_forcing", "dropout",       "lambda",        "max_epochs",     "patience",
      "seed",           "emb_dim",        "hidden",        "no_slot2intent", "no_intent2slot",
      "no_gaussian_attention", "no_cooperation"};
  return keys;
}

bool is_flag_key(const std::string &key) { return key.rfind("no_", 0) == 0; }

ConfigEntries parse_config_text(const std::string &text, const std::string &source) {
  ConfigEntries entries;
  std::istringstream in(text);
  std::string line;
  for (int number = 1; std::getline(in, line); ++number) {
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    const std::string key = eq == std::string::npos ? std::string() : trim(stripped.substr(0, eq));
    if (key.empty()) {
      throw ConfigError(source + ":" + std::to_string(number) + ": expected 'key = value'");
    }
    entries.emplace_back(key, trim(stripped.substr(eq + 1)));
  }
  return entries;
}

ConfigEntries read_config_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str(), path.string());
}

void apply_entries(RunConfig &c, const ConfigEntries &entries) {
  TrainConfig &t = c.train;
  for (const auto &[key, value] : entries) {
    if (key == "data") c.data = value;
    else if (key == "output") c.output = value;
    else if (key == "learning_rate") t.learning_rate = parse_double(key, value);
    else if (key == "l2_decay") t.l2_decay = parse_double(key, value);
    else if (key == "batch_size") t.batch_size = parse_size(key, value);
    else if (key == "teacher_forcing") t.teacher_forcing = parse_double(key, value);
    else if (key == "dropout") t.dropout = parse_double(key, value);
    else if (key == "lambda") t.lambda = parse_double(key, value);
    else if (key == "max_epochs") t.max_epochs = parse_size(key, value);
    else if (key == "patience") t.patience = parse_size(key, value);
    else if (key == "seed") t.seed = parse_number<std::uint64_t>(key, value, "a non-negative integer");
    else if (key == "emb_dim") t.emb_dim = parse_size(key, value);
    else if (key == "hidden") t.hidden = parse_size(key, value);
    else if (key == "no_slot2intent") t.ablation.no_slot2intent = parse_bool(key, value);
    else if (key == "no_intent2slot") t.ablation.no_intent2slot = parse_bool(key, value);
    else if (key == "no_gaussian_attention") t.ablation.no_gaussian_attention = parse_bool(key, value);
    else if (key == "no_cooperation") t.ablation.no_cooperation = parse_bool(key, value);
    else throw ConfigError("unknown config key '" + key + "'");
  }
}

ConfigEntries to_entries(const RunConfig &c) {
  const TrainConfig &t = c.train;
  return {
      {"data", c.data},
      {"output", c.output},
      {"learning_rate", format_double(t.learning_rate)},
      {"l2_decay", format_double(t.l2_decay)},
      {"batch_size", std::to_string(t.batch_size)},
      {"teacher_forcing", format_double(t.teacher_forcing)},
      {"dropout", format_double(t.dropout)},
      {"lambda", format_double(t.lambda)},
      {"max_epochs", std::to_string(t.max_epochs)},
      {"patience", std::to_string(t.patience)},
      {"seed", std::to_string(t.seed)},
      {"emb_dim", std::to_string(t.emb_dim)},
      {"hidden", std::to_string(t.hidden)},
      {"no_slot2intent", format_bool(t.ablation.no_slot2intent)},
      {"no_intent2slot", format_bool(t.ablation.no_intent2slot)},
      {"no_gaussian_attention", format_bool(t.ablation.no_gaussian_attention)},
      {"no_cooperation", format_bool(t.ablation.no_cooperation)},
  };
}

std::string to_text(const ConfigEntries &entries) {
  std::string out;
  for (const auto &[key, value] : entries) out += key + " = " + value + "\n";
  return out;
}

}  // namespace pin
