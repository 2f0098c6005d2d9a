#include <cstdint>
#include <iostream>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "geoinfer/geoinfer.h"

namespace {

using Settings = std::vector<std::pair<std::string, std::string>>;

struct ConfigHandle {
  geoinfer_config* ptr = geoinfer_config_new();
  ConfigHandle() = default;
  ConfigHandle(const ConfigHandle&) = delete;
  ConfigHandle& operator=(const ConfigHandle&) = delete;
  ~ConfigHandle() { geoinfer_config_free(ptr); }
};

int fail(geoinfer_status status) {
  std::cerr << "error: " << geoinfer_last_error() << "\n";
  return static_cast<int>(status);
}

// Precedence, lowest to highest: built-in defaults, --config file,
// --set pairs in order, dedicated flags.
int apply_settings(geoinfer_config* cfg, const std::string& config_file,
                   const std::vector<std::string>& sets, const Settings& flags) {
  if (!config_file.empty()) {
    if (auto st = geoinfer_config_load_file(cfg, config_file.c_str())) return fail(st);
  }
  for (const std::string& pair : sets) {
    const size_t eq = pair.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::cerr << "error: --set expects key=value, got '" << pair << "'\n";
      return static_cast<int>(GEOINFER_ERR_ARGUMENT);
    }
    if (auto st = geoinfer_config_set(cfg, pair.substr(0, eq).c_str(),
                                      pair.substr(eq + 1).c_str())) {
      return fail(st);
    }
  }
  for (const auto& [key, value] : flags) {
    if (auto st = geoinfer_config_set(cfg, key.c_str(), value.c_str())) return fail(st);
  }
  return 0;
}

void print_ingest(const geoinfer_ingest_report& r) {
  std::cout << "records: read=" << r.read << " parsed=" << r.parsed
            << " malformed=" << r.malformed << " deduped=" << r.deduped
            << " kept=" << r.kept << "\n";
}

struct CommonOpts {
  std::string config_file;
  std::vector<std::string> sets;
  Settings flags;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_file, "key=value configuration file");
    cmd->add_option("--set", sets, "override one configuration key (key=value)")
        ->take_all();
  }

  // Records a dedicated flag as a config override when the user passed it.
  CLI::Option* capture(CLI::App* cmd, const std::string& name, const std::string& key,
                       const std::string& help) {
    auto* opt = cmd->add_option_function<std::string>(
        name, [this, key](const std::string& v) { flags.emplace_back(key, v); }, help);
    return opt;
  }

  CLI::Option* capture_flag(CLI::App* cmd, const std::string& name, const std::string& key,
                            const std::string& help) {
    return cmd->add_flag_callback(
        name, [this, key] { flags.emplace_back(key, "true"); }, help);
  }
};

int run_command(const CommonOpts& opts,
                geoinfer_status (*command)(const geoinfer_config*,
                                           geoinfer_ingest_report*)) {
  ConfigHandle cfg;
  if (!cfg.ptr) return static_cast<int>(GEOINFER_ERR_INTERNAL);
  if (int rc = apply_settings(cfg.ptr, opts.config_file, opts.sets, opts.flags)) return rc;
  geoinfer_ingest_report report{};
  if (auto st = command(cfg.ptr, &report)) return fail(st);
  print_ingest(report);
  return 0;
}

int run_fingerprint(const CommonOpts& opts) {
  ConfigHandle cfg;
  if (!cfg.ptr) return static_cast<int>(GEOINFER_ERR_INTERNAL);
  if (int rc = apply_settings(cfg.ptr, opts.config_file, opts.sets, opts.flags)) return rc;
  char* fp = nullptr;
  if (auto st = geoinfer_config_fingerprint(cfg.ptr, &fp)) return fail(st);
  std::cout << fp << "\n";
  geoinfer_string_free(fp);
  return 0;
}

int run_predict(const std::string& bundle_path, const std::string& text, bool has_text) {
  geoinfer_bundle* bundle = nullptr;
  if (auto st = geoinfer_bundle_load(bundle_path.c_str(), &bundle)) return fail(st);
  std::unique_ptr<geoinfer_bundle, decltype(&geoinfer_bundle_free)> guard(
      bundle, geoinfer_bundle_free);

  const auto predict_one = [&](const std::string& line) -> int {
    char* out = nullptr;
    if (auto st = geoinfer_bundle_predict_json(bundle, line.c_str(), &out)) {
      return fail(st);
    }
    std::cout << out << std::endl;
    geoinfer_string_free(out);
    return 0;
  };

  if (has_text) return predict_one(text);

  std::string line;
  while (std::getline(std::cin, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (int rc = predict_one(line)) return rc;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"text-based geolocation: spatial partitioning, training, evaluation"};
  app.set_version_flag("--version", geoinfer_version());
  app.require_subcommand(1);

  CommonOpts part_opts;
  auto* partition = app.add_subcommand(
      "partition", "build the spatial partition and write partition.geojson");
  part_opts.attach(partition);
  part_opts.capture(partition, "--corpus", "corpus", "TSV corpus path");
  part_opts.capture(partition, "--capacity", "capacity", "leaf split threshold");
  part_opts.capture(partition, "--max-depth", "max_depth", "maximum tree depth");
  part_opts.capture(partition, "--out", "out_dir", "output directory");

  CommonOpts train_opts;
  auto* train = app.add_subcommand("train", "train one classifier and write bundle.json");
  train_opts.attach(train);
  train_opts.capture(train, "--corpus", "corpus", "TSV corpus path");
  train_opts.capture(train, "--capacity", "capacity", "leaf split threshold");
  train_opts.capture(train, "--classifier", "classifier", "mnb or logit");
  train_opts.capture(train, "--embedding", "embedding", "train, off, or load:PATH");
  train_opts.capture(train, "--min-df", "min_df", "minimum document frequency");
  train_opts.capture(train, "--alpha", "alpha", "naive Bayes smoothing");
  train_opts.capture(train, "--l2", "l2", "logistic regression penalty");
  train_opts.capture(train, "--seed", "seed", "random seed");
  train_opts.capture(train, "--out", "out_dir", "output directory");

  CommonOpts eval_opts;
  auto* evaluate = app.add_subcommand(
      "evaluate", "cross-validate and write metrics.csv plus report.json");
  eval_opts.attach(evaluate);
  eval_opts.capture(evaluate, "--corpus", "corpus", "TSV corpus path");
  eval_opts.capture(evaluate, "--capacity", "capacity", "leaf split threshold");
  eval_opts.capture(evaluate, "--capacities", "capacities",
                    "comma-separated capacity sweep");
  eval_opts.capture(evaluate, "--classifiers", "classifiers",
                    "comma-separated classifier list");
  eval_opts.capture(evaluate, "--embedding", "embedding", "train, off, or load:PATH");
  eval_opts.capture(evaluate, "--min-df", "min_df", "minimum document frequency");
  eval_opts.capture(evaluate, "--alpha", "alpha", "naive Bayes smoothing");
  eval_opts.capture(evaluate, "--l2", "l2", "logistic regression penalty");
  eval_opts.capture(evaluate, "--k", "k", "number of folds");
  eval_opts.capture(evaluate, "--seed", "seed", "random seed");
  eval_opts.capture_flag(evaluate, "--global-partition", "global_partition",
                         "partition once on the full dataset instead of per fold");
  eval_opts.capture_flag(evaluate, "--bias-train", "bias_train",
                         "weight training samples by inverse leaf frequency");
  eval_opts.capture_flag(evaluate, "--bias-report", "bias_report",
                         "also report leaf-frequency weighted metrics");
  eval_opts.capture_flag(evaluate, "--timing", "timing",
                         "include wall-clock timings in artifacts");
  eval_opts.capture(evaluate, "--out", "out_dir", "output directory");

  std::string bundle_path;
  std::string text;
  auto* predict = app.add_subcommand(
      "predict", "predict locations for texts (one JSON object per line)");
  predict->add_option("--bundle", bundle_path, "trained bundle.json path")->required();
  auto* text_opt =
      predict->add_option("--text", text, "predict this text instead of reading stdin");

  CommonOpts fp_opts;
  auto* fingerprint = app.add_subcommand(
      "fingerprint", "print the 16-hex-digit fingerprint of the effective configuration");
  fp_opts.attach(fingerprint);
  fp_opts.capture(fingerprint, "--corpus", "corpus", "TSV corpus path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(GEOINFER_ERR_ARGUMENT);
  }

  if (partition->parsed()) return run_command(part_opts, geoinfer_run_partition);
  if (train->parsed()) return run_command(train_opts, geoinfer_run_train);
  if (evaluate->parsed()) return run_command(eval_opts, geoinfer_run_evaluate);
  if (predict->parsed()) return run_predict(bundle_path, text, text_opt->count() > 0);
  if (fingerprint->parsed()) return run_fingerprint(fp_opts);
  return static_cast<int>(GEOINFER_ERR_ARGUMENT);
}
