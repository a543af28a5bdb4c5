#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "spamlens/augment.hpp"
#include "spamlens/classifier.hpp"
#include "spamlens/explain.hpp"
#include "spamlens/lime.hpp"
#include "spamlens/metrics.hpp"
#include "spamlens/train.hpp"
#include "spamlens/translate.hpp"

namespace spamlens {

// One configuration object drives every command. A single master seed feeds
// the split, augmentation, initialization, training and explanation streams,
// and the full snapshot (seed included) is embedded in every artifact.
struct RunConfig {
  std::string dataset;
  std::string workdir = "run";
  std::uint64_t seed = 42;

  double train_fraction = 0.8;
  bool stratified = false;
  bool balanced = false;   // prepare: balance before splitting
  bool lowercase = false;  // preprocessing option, off by default

  std::size_t vocab_size = 2000;
  int max_len = 64;

  ModelConfig model;   // vocab_size/max_len filled in at train time
  TrainConfig train;
  AugmentConfig augment;

  std::string provider_kind = "offline";  // "offline" | "rest"
  RestProviderConfig rest;

  LimeConfig lime;
  int intgrad_steps = 50;

  double nb_alpha = 1.0;
  int knn_k = 5;
  double svm_lambda = 1e-4;
  int svm_epochs = 10;
};

// Partial JSON -> config with defaults; unknown keys are rejected.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& config);
RunConfig load_config_file(const std::string& path);

// Provider selection; SPAMLENS_API_KEY overrides the configured key.
std::unique_ptr<TranslationProvider> make_provider(const RunConfig& config);

// Cleans every message (dropping any that clean to empty), optionally
// balances, splits, and writes <workdir>/train.tsv, test.tsv and
// prepare_stats.json.
struct PrepareStats {
  std::size_t input_messages = 0;
  std::size_t dropped_empty = 0;
  std::size_t ham = 0;
  std::size_t spam = 0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
};
PrepareStats cmd_prepare(const RunConfig& config);

// Cleans and balances the dataset corpus, writing <workdir>/balanced.tsv and
// augment_stats.json. A pre-balanced input passes through with a warning.
struct AugmentStats {
  std::size_t ham_before = 0;
  std::size_t spam_before = 0;
  std::size_t ham_after = 0;
  std::size_t spam_after = 0;
  bool already_balanced = false;
};
AugmentStats cmd_augment(const RunConfig& config);

// Trains `model_kind` in {transformer, nb, knn, svm} on <workdir>/train.tsv,
// writing <workdir>/<kind>.ckpt (plus, for the transformer,
// transformer_epochs.csv and vocab.txt). Returns the checkpoint path.
std::string cmd_train(const RunConfig& config, const std::string& model_kind);

// Evaluates a checkpoint on a TSV test set and writes
// <workdir>/evaluate_<kind>.json.
MetricsReport cmd_evaluate(const RunConfig& config,
                           const std::string& checkpoint_path,
                           const std::string& test_tsv);

// Runs one explainer on one text, writing explain_<method>.json and .html.
Explanation cmd_explain(const RunConfig& config,
                        const std::string& checkpoint_path,
                        const std::string& text, const std::string& method);

// Evaluates every checkpoint in the workdir on the shared train/test TSVs
// and writes compare.csv + compare.json. Returns the table.
nlohmann::json cmd_compare(const RunConfig& config);

}  // namespace spamlens
