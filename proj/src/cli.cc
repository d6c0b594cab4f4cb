#include "pin/cli.h"

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

#include "pin/checkpoint.h"
#include "pin/config.h"
#include "pin/data.h"
#include "pin/model_check.h"
#include "pin/synth.h"
#include "pin/trainer.h"

namespace pin {

namespace {

namespace fs = std::filesystem;

constexpr double kGradcheckThreshold = 1e-4;

std::string option_name(const std::string &key) {
  std::string name = "--" + key;
  for (char &c : name)
    if (c == '_') c = '-';
  return name;
}

void write_file(const fs::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

// Shortest text that reads back to the same double.
std::string format_exact(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

// Config keys given on the command line, collected as strings so they can be
// applied on top of a config file.
struct ConfigOptions {
  std::string config_file;
  std::map<std::string, std::string> values;
  std::map<std::string, bool> flags;
  std::map<std::string, CLI::Option *> options;

  void add_to(CLI::App &app, const std::vector<std::string> &keys) {
    app.add_option("--config", config_file, "key = value config file");
    for (const std::string &key : keys) {
      if (is_flag_key(key)) {
        options[key] = app.add_flag(option_name(key), flags[key], "ablation: " + key);
      } else {
        options[key] = app.add_option(option_name(key), values[key], key);
      }
    }
  }

  RunConfig resolve() const {
    RunConfig config;
    if (!config_file.empty()) apply_entries(config, read_config_file(config_file));
    ConfigEntries overrides;
    for (const auto &[key, option] : options) {
      if (option->count() == 0) continue;
      overrides.emplace_back(key, is_flag_key(key) ? std::string("true") : values.at(key));
    }
    apply_entries(config, overrides);
    validate(config.train);
    return config;
  }
};

Ablation ablation_flags(const ConfigOptions &opts) {
  RunConfig c = opts.resolve();
  return c.train.ablation;
}

std::string history_text(const TrainResult &result) {
  std::string out = "epoch\ttrain_loss\tdev_intent_error_rate\tdev_slot_f1\tdev_sentence_accuracy\timproved\n";
  for (const EpochRecord &e : result.history) {
    out += std::to_string(e.epoch) + "\t" + format_exact(e.train_loss) + "\t" +
           format_exact(e.dev.intent_error_rate) + "\t" + format_exact(e.dev.slot_f1) + "\t" +
           format_exact(e.dev.sentence_accuracy) + "\t" + (e.improved ? "1" : "0") + "\n";
  }
  return out;
}

int cmd_train(const ConfigOptions &opts, std::ostream &out) {
  const RunConfig config = opts.resolve();
  if (config.data.empty()) throw ConfigError("train needs --data (or data = ... in the config file)");
  const Corpus corpus = load_corpus(config.data);
  const Vocab vocab = build_vocabs(corpus);
  const auto train_set = encode_all(corpus.train, vocab);
  const auto dev_set = encode_all(corpus.dev, vocab);
  const auto test_set = encode_all(corpus.test, vocab);

  const fs::path dir = config.output;
  fs::create_directories(dir);
  const ConfigEntries entries = to_entries(config);
  write_file(dir / "config.txt", to_text(entries));
  out << to_text(entries) << '\n';

  PinModel model = make_model(config.train, vocab);
  const TrainResult result = train(model, train_set, dev_set, vocab, config.train, [&](const EpochRecord &e) {
    char line[160];
    std::snprintf(line, sizeof(line), "epoch %zu loss %.4f dev intent_err %.4f slot_f1 %.4f sent_acc %.4f%s\n",
                  e.epoch, e.train_loss, e.dev.intent_error_rate, e.dev.slot_f1, e.dev.sentence_accuracy,
                  e.improved ? " *" : "");
    out << line << std::flush;
    return true;
  });

  write_file(dir / "history.tsv", history_text(result));
  std::string dev_reports;
  for (const EpochRecord &e : result.history) dev_reports += "epoch = " + std::to_string(e.epoch) + "\n" + to_text(e.dev) + "\n";
  write_file(dir / "dev_metrics.txt", dev_reports);
  write_checkpoint(dir / "model.ckpt", make_checkpoint(model, vocab, entries, config.train.seed));

  std::string final_text = "best_epoch = " + std::to_string(result.best_epoch) + "\n";
  if (!dev_set.empty()) final_text += "\n[dev]\n" + to_text(evaluate_model(model, dev_set, vocab));
  if (!test_set.empty()) final_text += "\n[test]\n" + to_text(evaluate_model(model, test_set, vocab));
  write_file(dir / "final_metrics.txt", final_text);
  out << '\n' << final_text;
  return 0;
}

int cmd_evaluate(const std::string &checkpoint, const std::string &data, const std::string &split_name,
                 std::string report, std::ostream &out) {
  const auto split = parse_split(split_name);
  if (!split) throw ConfigError("unknown split '" + split_name + "' (expected train, valid or test)");
  const Checkpoint ckpt = read_checkpoint(checkpoint);
  const std::vector<Sample> samples = load_split(fs::path(data) / split_dir(*split));
  if (samples.empty()) throw CorpusError("split '" + split_name + "' is empty");
  check_compatible(ckpt, samples);
  const PinModel model = restore_model(ckpt);
  const std::string text = to_text(evaluate_model(model, encode_all(samples, ckpt.vocab), ckpt.vocab));
  if (report.empty()) report = (fs::path(checkpoint).parent_path() / (std::string(split_dir(*split)) + "_metrics.txt")).string();
  write_file(report, text);
  out << text;
  return 0;
}

std::vector<std::string> split_words(const std::string &line) {
  std::istringstream in(line);
  std::vector<std::string> words;
  for (std::string w; in >> w;) words.push_back(w);
  return words;
}

int cmd_predict(const std::string &checkpoint, const std::vector<std::string> &words, std::istream &in,
                std::ostream &out) {
  std::vector<std::vector<std::string>> utterances;
  if (!words.empty()) {
    std::string joined;
    for (const std::string &w : words) joined += w + " ";
    utterances.push_back(split_words(joined));
  } else {
    for (std::string line; std::getline(in, line);) {
      auto tokens = split_words(line);
      if (!tokens.empty()) utterances.push_back(std::move(tokens));
    }
  }
  if (utterances.empty() || utterances.front().empty()) throw CorpusError("predict: empty input");

  const Checkpoint ckpt = read_checkpoint(checkpoint);
  const PinModel model = restore_model(ckpt);
  std::vector<EncodedSample> samples;
  for (const auto &tokens : utterances) samples.push_back(encode(Sample{tokens, {}, {}}, ckpt.vocab));
  const Predictions pred = predict(model, samples, ckpt.vocab);
  for (std::size_t u = 0; u < utterances.size(); ++u) {
    if (u > 0) out << '\n';
    out << "intent = " << pred.intents[u] << '\n';
    for (std::size_t i = 0; i < utterances[u].size(); ++i) out << utterances[u][i] << '\t' << pred.tags[u][i] << '\n';
  }
  return 0;
}

int cmd_gradcheck(const Ablation &ablation, std::uint64_t seed, std::ostream &out) {
  const PinModel model = gradcheck_model(ablation, seed);
  const std::vector<GroupCheck> groups = check_model_gradients(model, gradcheck_batch());
  bool ok = true;
  double worst = 0.0;
  char line[160];
  for (const GroupCheck &g : groups) {
    if (!g.active) {
      ok = ok && g.zero_grad;
      std::snprintf(line, sizeof(line), "%-32s %s\n", g.group.c_str(),
                    g.zero_grad ? "unused (zero grad)" : "unused but gradient is nonzero");
    } else {
      ok = ok && g.max_error <= kGradcheckThreshold;
      worst = std::max(worst, g.max_error);
      std::snprintf(line, sizeof(line), "%-32s %.3e\n", g.group.c_str(), g.max_error);
    }
    out << line;
  }
  std::snprintf(line, sizeof(line), "max relative error %.3e (threshold %.0e): %s\n", worst, kGradcheckThreshold,
                ok ? "ok" : "FAILED");
  out << line;
  return ok ? 0 : 1;
}

int cmd_synth(const SynthSpec &spec, const std::string &output, std::ostream &out) {
  validate(spec);
  const Corpus corpus = generate_synthetic(spec);
  write_corpus(corpus, output);
  write_file(fs::path(output) / "synth_spec.txt", to_text(spec));
  out << "wrote " << corpus.train.size() << "/" << corpus.dev.size() << "/" << corpus.test.size()
      << " utterances to " << output << '\n'
      << to_text(spec);
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string> &args, std::istream &in, std::ostream &out, std::ostream &err) {
  CLI::App app("Parallel interactive network for joint intent detection and slot filling", "pin");
  app.require_subcommand(1);

  CLI::App *train_cmd = app.add_subcommand("train", "train a model on a corpus directory");
  ConfigOptions train_opts;
  train_opts.add_to(*train_cmd, config_keys());

  CLI::App *eval_cmd = app.add_subcommand("evaluate", "score a checkpoint on one split");
  std::string eval_ckpt, eval_data, eval_split = "test", eval_report;
  eval_cmd->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();
  eval_cmd->add_option("--data", eval_data, "corpus directory")->required();
  eval_cmd->add_option("--split", eval_split, "train, valid or test")->capture_default_str();
  eval_cmd->add_option("--report", eval_report, "metrics file (default: <split>_metrics.txt beside the checkpoint)");

  CLI::App *predict_cmd = app.add_subcommand("predict", "tag an utterance (or stdin lines)");
  std::string predict_ckpt;
  std::vector<std::string> predict_words;
  predict_cmd->add_option("--checkpoint", predict_ckpt, "checkpoint file")->required();
  predict_cmd->add_option("words", predict_words, "whitespace-tokenised utterance");

  CLI::App *grad_cmd = app.add_subcommand("gradcheck", "finite-difference check of a tiny model");
  ConfigOptions grad_opts;
  grad_opts.add_to(*grad_cmd, {"seed", "no_slot2intent", "no_intent2slot", "no_gaussian_attention", "no_cooperation"});

  CLI::App *synth_cmd = app.add_subcommand("synth", "write a synthetic corpus");
  SynthSpec spec;
  std::string synth_out;
  synth_cmd->add_option("--output", synth_out, "corpus directory")->required();
  synth_cmd->add_option("--seed", spec.seed)->capture_default_str();
  synth_cmd->add_option("--purity", spec.purity)->capture_default_str();
  synth_cmd->add_option("--intents", spec.n_intents)->capture_default_str();
  synth_cmd->add_option("--slot-types", spec.slot_types_per_intent)->capture_default_str();
  synth_cmd->add_option("--lexicon", spec.lexicon_size)->capture_default_str();
  synth_cmd->add_option("--filler", spec.filler_vocab)->capture_default_str();
  synth_cmd->add_option("--min-len", spec.min_len)->capture_default_str();
  synth_cmd->add_option("--max-len", spec.max_len)->capture_default_str();
  synth_cmd->add_option("--train", spec.train_samples)->capture_default_str();
  synth_cmd->add_option("--dev", spec.dev_samples)->capture_default_str();
  synth_cmd->add_option("--test", spec.test_samples)->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    return app.exit(e, out, err);
  }

  try {
    if (train_cmd->parsed()) return cmd_train(train_opts, out);
    if (eval_cmd->parsed()) return cmd_evaluate(eval_ckpt, eval_data, eval_split, eval_report, out);
    if (predict_cmd->parsed()) return cmd_predict(predict_ckpt, predict_words, in, out);
    if (grad_cmd->parsed()) return cmd_gradcheck(ablation_flags(grad_opts), grad_opts.resolve().train.seed, out);
    if (synth_cmd->parsed()) return cmd_synth(spec, synth_out, out);
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace pin
