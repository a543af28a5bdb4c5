#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "spamlens/pipeline.hpp"

namespace {

// exit codes: 0 ok, 1 usage, 2 data, 3 provider/network
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitProvider = 3;

struct CommonOpts {
  std::string config_path;
  std::string dataset;
  std::string workdir;
  std::int64_t seed = -1;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "JSON config file");
  cmd->add_option("--dataset", opts.dataset, "input TSV (label\\ttext)");
  cmd->add_option("--workdir", opts.workdir, "artifact directory");
  cmd->add_option("--seed", opts.seed, "master seed");
}

spamlens::RunConfig resolve_config(const CommonOpts& opts) {
  spamlens::RunConfig config;
  if (!opts.config_path.empty()) {
    config = spamlens::load_config_file(opts.config_path);
  }
  if (!opts.dataset.empty()) config.dataset = opts.dataset;
  if (!opts.workdir.empty()) config.workdir = opts.workdir;
  if (opts.seed >= 0) config.seed = static_cast<std::uint64_t>(opts.seed);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SMS spam classification, augmentation and explanation"};
  app.require_subcommand(1);

  CommonOpts opts;
  bool balanced = false;
  std::string model_kind = "transformer";
  std::string checkpoint_path;
  std::string test_path;
  std::string text;
  std::string method = "lime";

  auto* prepare = app.add_subcommand(
      "prepare", "clean the dataset, optionally balance, and split");
  add_common(prepare, opts);
  prepare->add_flag("--balanced", balanced, "balance classes before the split");

  auto* augment = app.add_subcommand(
      "augment", "back-translate the minority class to parity");
  add_common(augment, opts);

  auto* train = app.add_subcommand("train", "train a model on the prepared split");
  add_common(train, opts);
  train->add_option("--model", model_kind,
                    "transformer | nb | knn | svm");

  auto* evaluate = app.add_subcommand("evaluate", "score a checkpoint on a test set");
  add_common(evaluate, opts);
  evaluate->add_option("--checkpoint", checkpoint_path, "model checkpoint")
      ->required();
  evaluate->add_option("--test", test_path, "test TSV; defaults to workdir/test.tsv");

  auto* explain = app.add_subcommand("explain", "word attributions for one text");
  add_common(explain, opts);
  explain->add_option("--checkpoint", checkpoint_path, "model checkpoint")
      ->required();
  explain->add_option("--text", text, "message text")->required();
  explain->add_option("--method", method, "lime | intgrad");

  auto* compare = app.add_subcommand("compare", "tabulate every checkpoint in the workdir");
  add_common(compare, opts);

  CLI11_PARSE(app, argc, argv);

  try {
    spamlens::RunConfig config = resolve_config(opts);
    if (prepare->parsed()) {
      if (balanced) config.balanced = true;
      const auto stats = spamlens::cmd_prepare(config);
      std::cout << "prepared " << stats.train_size << " train / "
                << stats.test_size << " test messages (ham " << stats.ham
                << ", spam " << stats.spam << ")\n";
    } else if (augment->parsed()) {
      const auto stats = spamlens::cmd_augment(config);
      std::cout << "balanced counts: ham " << stats.ham_after << ", spam "
                << stats.spam_after << "\n";
    } else if (train->parsed()) {
      const std::string path = spamlens::cmd_train(config, model_kind);
      std::cout << "checkpoint written to " << path << "\n";
    } else if (evaluate->parsed()) {
      if (test_path.empty()) test_path = config.workdir + "/test.tsv";
      const auto report = spamlens::cmd_evaluate(config, checkpoint_path, test_path);
      std::cout << "accuracy " << report.accuracy << " (tp " << report.matrix.tp
                << ", tn " << report.matrix.tn << ", fp " << report.matrix.fp
                << ", fn " << report.matrix.fn << ")\n";
    } else if (explain->parsed()) {
      const auto explanation =
          spamlens::cmd_explain(config, checkpoint_path, text, method);
      for (const auto& attr : explanation.attributions) {
        std::cout << attr.word << "\t" << attr.coefficient << "\n";
      }
    } else if (compare->parsed()) {
      const auto table = spamlens::cmd_compare(config);
      std::cout << table.at("models").dump(2) << "\n";
    }
  } catch (const spamlens::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const spamlens::ProviderError& e) {
    std::cerr << "provider error: " << e.what() << "\n";
    return kExitProvider;
  } catch (const spamlens::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
