// Flat `key = value` run configuration with defaults < file < command line
// precedence.

#ifndef PIN_CONFIG_H_
#define PIN_CONFIG_H_

#include <filesystem>
#include <string>
#include <vector>

#include "pin/checkpoint.h"
#include "pin/trainer.h"

namespace pin {

struct RunConfig {
  TrainConfig train;
  std::string data;
  std::string output = "run";
};

// Every key a RunConfig accepts, in the order they are written.
const std::vector<std::string> &config_keys();
bool is_flag_key(const std::string &key);

// Blank lines and lines starting with '#' are skipped. Throws ConfigError
// naming the source and line for anything that is not `key = value`.
ConfigEntries parse_config_text(const std::string &text, const std::string &source);
ConfigEntries read_config_file(const std::filesystem::path &path);

// Applies entries in order. Throws ConfigError on an unknown key or a value
// that does not parse.
void apply_entries(RunConfig &config, const ConfigEntries &entries);

ConfigEntries to_entries(const RunConfig &config);
std::string to_text(const ConfigEntries &entries);

}  // namespace pin

#endif  // PIN_CONFIG_H_
