#include "spamlens/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <tuple>

#include "spamlens/bpe.hpp"
#include "spamlens/intgrad.hpp"
#include "spamlens/preprocess.hpp"

namespace spamlens {

namespace fs = std::filesystem;

namespace {

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write: " + path);
  out << content;
  if (!out) throw DataError("write failed: " + path);
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

std::string fmt6(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", value);
  return buf;
}

std::string lowercased(std::string text) {
  for (char& c : text) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return text;
}

// Preprocess every message; messages whose text cleans to empty are dropped
// (the TSV record format cannot carry them) and ids are reassigned densely.
Corpus clean_corpus(const Corpus& corpus, bool lowercase,
                    std::size_t* dropped) {
  Corpus out;
  std::size_t skipped = 0;
  for (const Message& msg : corpus.messages) {
    std::string text = clean_text(msg.text);
    if (lowercase) text = lowercased(text);
    text = remove_repeat(text, 1);
    if (text.empty()) {
      ++skipped;
      continue;
    }
    Message cleaned = msg;
    cleaned.id = static_cast<int>(out.messages.size());
    cleaned.text = std::move(text);
    out.messages.push_back(std::move(cleaned));
  }
  if (dropped != nullptr) *dropped = skipped;
  return out;
}

Corpus load_clean(const std::string& path, bool lowercase) {
  return clean_corpus(load_tsv(path), lowercase, nullptr);
}

std::string workdir_path(const RunConfig& config, const std::string& name) {
  return (fs::path(config.workdir) / name).string();
}

void ensure_workdir(const RunConfig& config) {
  fs::create_directories(config.workdir);
}

nlohmann::json counts_json(const Corpus& corpus) {
  const auto [ham, spam] = class_counts(corpus);
  return {{"ham", ham}, {"spam", spam}};
}

AugmentConfig augment_config(const RunConfig& config) {
  AugmentConfig ac = config.augment;
  ac.seed = config.seed;
  return ac;
}

}  // namespace

RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig config;
  static const std::set<std::string> known = {
      "dataset",    "workdir",      "seed",        "train_fraction",
      "stratified", "balanced",     "lowercase",   "tokenizer",
      "model",      "train",        "augment",     "provider",
      "lime",       "intgrad_steps","baselines"};
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) {
      throw UsageError("config: unknown key '" + key + "'");
    }
  }

  config.dataset = j.value("dataset", config.dataset);
  config.workdir = j.value("workdir", config.workdir);
  config.seed = j.value("seed", config.seed);
  config.train_fraction = j.value("train_fraction", config.train_fraction);
  config.stratified = j.value("stratified", config.stratified);
  config.balanced = j.value("balanced", config.balanced);
  config.lowercase = j.value("lowercase", config.lowercase);

  if (j.contains("tokenizer")) {
    const auto& t = j.at("tokenizer");
    config.vocab_size = t.value("vocab_size", config.vocab_size);
    config.max_len = t.value("max_len", config.max_len);
  }
  if (j.contains("model")) {
    const auto& m = j.at("model");
    config.model.n_layers = m.value("n_layers", config.model.n_layers);
    config.model.d_model = m.value("d_model", config.model.d_model);
    config.model.n_heads = m.value("n_heads", config.model.n_heads);
    config.model.d_ff = m.value("d_ff", config.model.d_ff);
    config.model.dropout_rate =
        m.value("dropout_rate", config.model.dropout_rate);
  }
  if (j.contains("train")) {
    const auto& t = j.at("train");
    config.train.epochs = t.value("epochs", config.train.epochs);
    config.train.train_batch = t.value("train_batch", config.train.train_batch);
    config.train.eval_batch = t.value("eval_batch", config.train.eval_batch);
    config.train.learning_rate =
        t.value("learning_rate", config.train.learning_rate);
    config.train.weight_decay =
        t.value("weight_decay", config.train.weight_decay);
    config.train.beta1 = t.value("beta1", config.train.beta1);
    config.train.beta2 = t.value("beta2", config.train.beta2);
    config.train.epsilon = t.value("epsilon", config.train.epsilon);
  }
  if (j.contains("augment")) {
    const auto& a = j.at("augment");
    if (a.contains("languages")) {
      config.augment.languages =
          a.at("languages").get<std::vector<std::string>>();
    }
    config.augment.max_rounds = a.value("max_rounds", config.augment.max_rounds);
    config.augment.duplicate_fill =
        a.value("duplicate_fill", config.augment.duplicate_fill);
  }
  if (j.contains("provider")) {
    const auto& p = j.at("provider");
    config.provider_kind = p.value("kind", config.provider_kind);
    config.rest.endpoint = p.value("endpoint", config.rest.endpoint);
    config.rest.api_key = p.value("api_key", config.rest.api_key);
    config.rest.timeout_ms = p.value("timeout_ms", config.rest.timeout_ms);
    config.rest.retries = p.value("retries", config.rest.retries);
  }
  if (j.contains("lime")) {
    const auto& l = j.at("lime");
    config.lime.num_samples = l.value("num_samples", config.lime.num_samples);
    config.lime.num_features =
        l.value("num_features", config.lime.num_features);
    config.lime.kernel_width =
        l.value("kernel_width", config.lime.kernel_width);
    config.lime.ridge_lambda =
        l.value("ridge_lambda", config.lime.ridge_lambda);
  }
  config.intgrad_steps = j.value("intgrad_steps", config.intgrad_steps);
  if (j.contains("baselines")) {
    const auto& b = j.at("baselines");
    config.nb_alpha = b.value("nb_alpha", config.nb_alpha);
    config.knn_k = b.value("knn_k", config.knn_k);
    config.svm_lambda = b.value("svm_lambda", config.svm_lambda);
    config.svm_epochs = b.value("svm_epochs", config.svm_epochs);
  }
  return config;
}

nlohmann::json config_to_json(const RunConfig& config) {
  return {
      {"dataset", config.dataset},
      {"workdir", config.workdir},
      {"seed", config.seed},
      {"train_fraction", config.train_fraction},
      {"stratified", config.stratified},
      {"balanced", config.balanced},
      {"lowercase", config.lowercase},
      {"tokenizer",
       {{"vocab_size", config.vocab_size}, {"max_len", config.max_len}}},
      {"model",
       {{"n_layers", config.model.n_layers},
        {"d_model", config.model.d_model},
        {"n_heads", config.model.n_heads},
        {"d_ff", config.model.d_ff},
        {"dropout_rate", config.model.dropout_rate}}},
      {"train",
       {{"epochs", config.train.epochs},
        {"train_batch", config.train.train_batch},
        {"eval_batch", config.train.eval_batch},
        {"learning_rate", config.train.learning_rate},
        {"weight_decay", config.train.weight_decay},
        {"beta1", config.train.beta1},
        {"beta2", config.train.beta2},
        {"epsilon", config.train.epsilon}}},
      {"augment",
       {{"languages", config.augment.languages},
        {"max_rounds", config.augment.max_rounds},
        {"duplicate_fill", config.augment.duplicate_fill}}},
      {"provider",
       {{"kind", config.provider_kind},
        {"endpoint", config.rest.endpoint},
        {"timeout_ms", config.rest.timeout_ms},
        {"retries", config.rest.retries}}},
      {"lime",
       {{"num_samples", config.lime.num_samples},
        {"num_features", config.lime.num_features},
        {"kernel_width", config.lime.kernel_width},
        {"ridge_lambda", config.lime.ridge_lambda}}},
      {"intgrad_steps", config.intgrad_steps},
      {"baselines",
       {{"nb_alpha", config.nb_alpha},
        {"knn_k", config.knn_k},
        {"svm_lambda", config.svm_lambda},
        {"svm_epochs", config.svm_epochs}}},
  };
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw UsageError("config file is not valid JSON: " + std::string(e.what()));
  }
  return config_from_json(j);
}

std::unique_ptr<TranslationProvider> make_provider(const RunConfig& config) {
  if (config.provider_kind == "offline") {
    return std::make_unique<OfflineProvider>();
  }
  if (config.provider_kind == "rest") {
    RestProviderConfig rest = config.rest;
    if (rest.endpoint.empty()) {
      throw UsageError("rest provider needs provider.endpoint");
    }
    if (const char* key = std::getenv("SPAMLENS_API_KEY")) {
      rest.api_key = key;
    }
    return std::make_unique<RestProvider>(rest);
  }
  throw UsageError("unknown provider kind '" + config.provider_kind + "'");
}

PrepareStats cmd_prepare(const RunConfig& config) {
  if (config.dataset.empty()) throw UsageError("prepare: dataset path missing");
  ensure_workdir(config);

  const Corpus raw = load_tsv(config.dataset);
  PrepareStats stats;
  stats.input_messages = raw.size();
  Corpus corpus = clean_corpus(raw, config.lowercase, &stats.dropped_empty);

  if (config.balanced) {
    const auto provider = make_provider(config);
    corpus = balance(corpus, *provider, augment_config(config));
  }
  const auto [ham, spam] = class_counts(corpus);
  stats.ham = ham;
  stats.spam = spam;

  const SplitResult result =
      split(corpus, config.train_fraction, config.seed, config.stratified);
  stats.train_size = result.train.size();
  stats.test_size = result.test.size();

  save_tsv(result.train, workdir_path(config, "train.tsv"));
  save_tsv(result.test, workdir_path(config, "test.tsv"));
  write_json_file(workdir_path(config, "prepare_stats.json"),
                  {{"input_messages", stats.input_messages},
                   {"dropped_empty", stats.dropped_empty},
                   {"balanced", config.balanced},
                   {"class_counts", {{"ham", ham}, {"spam", spam}}},
                   {"train_size", stats.train_size},
                   {"test_size", stats.test_size},
                   {"train_counts", counts_json(result.train)},
                   {"test_counts", counts_json(result.test)},
                   {"config", config_to_json(config)}});
  return stats;
}

AugmentStats cmd_augment(const RunConfig& config) {
  if (config.dataset.empty()) throw UsageError("augment: dataset path missing");
  ensure_workdir(config);

  const Corpus corpus = load_clean(config.dataset, config.lowercase);
  AugmentStats stats;
  std::tie(stats.ham_before, stats.spam_before) = class_counts(corpus);

  Corpus balanced_corpus;
  if (stats.ham_before == stats.spam_before) {
    stats.already_balanced = true;
    balanced_corpus = corpus;
    std::cerr << "warning: corpus already balanced; output unchanged\n";
  } else {
    const auto provider = make_provider(config);
    balanced_corpus = balance(corpus, *provider, augment_config(config));
  }
  std::tie(stats.ham_after, stats.spam_after) = class_counts(balanced_corpus);

  save_tsv(balanced_corpus, workdir_path(config, "balanced.tsv"));
  write_json_file(
      workdir_path(config, "augment_stats.json"),
      {{"input_counts",
        {{"ham", stats.ham_before}, {"spam", stats.spam_before}}},
       {"output_counts",
        {{"ham", stats.ham_after}, {"spam", stats.spam_after}}},
       {"augmented_added",
        balanced_corpus.size() - corpus.size()},
       {"already_balanced", stats.already_balanced},
       {"config", config_to_json(config)}});
  return stats;
}

std::string cmd_train(const RunConfig& config, const std::string& model_kind) {
  ensure_workdir(config);
  const std::string train_path = workdir_path(config, "train.tsv");
  const std::string test_path = workdir_path(config, "test.tsv");
  if (!fs::exists(train_path) || !fs::exists(test_path)) {
    throw DataError("train: missing " + train_path + " or " + test_path +
                    " (run prepare first)");
  }
  const Corpus train_corpus = load_tsv(train_path);
  const Corpus test_corpus = load_tsv(test_path);
  const std::string ckpt_path = workdir_path(config, model_kind + ".ckpt");
  const nlohmann::json snapshot = config_to_json(config);

  if (model_kind == "transformer") {
    const Vocab vocab = train_bpe(train_corpus, config.vocab_size);
    save_vocab(vocab, workdir_path(config, "vocab.txt"));

    ModelConfig mc = config.model;
    mc.max_len = config.max_len;
    mc.vocab_size = static_cast<int>(vocab.size());

    std::vector<TokenSeq> train_seqs, test_seqs;
    std::vector<int> train_labels, test_labels;
    for (const Message& msg : train_corpus.messages) {
      train_seqs.push_back(encode(vocab, msg.text, mc.max_len));
      train_labels.push_back(static_cast<int>(msg.label));
    }
    for (const Message& msg : test_corpus.messages) {
      test_seqs.push_back(encode(vocab, msg.text, mc.max_len));
      test_labels.push_back(static_cast<int>(msg.label));
    }

    TrainConfig tc = config.train;
    tc.seed = config.seed;
    auto result = train_loop(init_params<float>(mc, config.seed), train_seqs,
                             train_labels, test_seqs, test_labels, tc);

    std::string csv = "# config: " + snapshot.dump() + "\n";
    csv += "epoch,train_loss,train_acc,test_loss,test_acc\n";
    for (const EpochStats& row : result.log) {
      csv += std::to_string(row.epoch) + "," + fmt6(row.train_loss) + "," +
             fmt6(row.train_acc) + "," + fmt6(row.test_loss) + "," +
             fmt6(row.test_acc) + "\n";
    }
    write_text_file(workdir_path(config, "transformer_epochs.csv"), csv);

    const TransformerClassifier classifier(std::move(result.params), vocab);
    save_checkpoint(to_checkpoint(classifier, snapshot), ckpt_path);
    return ckpt_path;
  }

  if (model_kind == "nb") {
    const NaiveBayesClassifier classifier(
        nb_train(train_corpus, config.nb_alpha));
    save_checkpoint(to_checkpoint(classifier, snapshot), ckpt_path);
    return ckpt_path;
  }
  if (model_kind == "knn") {
    const KnnClassifier classifier(knn_fit(train_corpus, config.knn_k));
    save_checkpoint(to_checkpoint(classifier, snapshot), ckpt_path);
    return ckpt_path;
  }
  if (model_kind == "svm") {
    const SvmClassifier classifier(svm_train(
        train_corpus, config.svm_lambda, config.svm_epochs, config.seed));
    save_checkpoint(to_checkpoint(classifier, snapshot), ckpt_path);
    return ckpt_path;
  }
  throw UsageError("unknown model kind '" + model_kind +
                   "' (expected transformer, nb, knn or svm)");
}

MetricsReport cmd_evaluate(const RunConfig& config,
                           const std::string& checkpoint_path,
                           const std::string& test_tsv) {
  ensure_workdir(config);
  const auto classifier =
      classifier_from_checkpoint(load_checkpoint(checkpoint_path));
  const Corpus test_corpus = load_clean(test_tsv, config.lowercase);
  if (test_corpus.empty()) throw DataError("evaluate: empty test set");

  const ClassifierEval eval = classifier->evaluate_corpus(test_corpus);
  std::vector<Label> labels;
  for (const Message& msg : test_corpus.messages) labels.push_back(msg.label);
  const MetricsReport report = metrics_report(confusion(eval.predictions, labels));

  nlohmann::json out = report_to_json(report);
  out["model_kind"] = classifier->kind();
  if (eval.loss) out["loss"] = *eval.loss;
  out["config"] = config_to_json(config);
  write_json_file(
      workdir_path(config, "evaluate_" + classifier->kind() + ".json"), out);
  return report;
}

Explanation cmd_explain(const RunConfig& config,
                        const std::string& checkpoint_path,
                        const std::string& text, const std::string& method) {
  ensure_workdir(config);
  std::string clean = clean_text(text);
  if (config.lowercase) clean = lowercased(clean);
  clean = remove_repeat(clean, 1);
  if (clean.empty()) throw DataError("explain: text is empty after cleaning");

  const auto classifier =
      classifier_from_checkpoint(load_checkpoint(checkpoint_path));

  Explanation explanation;
  if (method == "lime") {
    LimeConfig lc = config.lime;
    lc.seed = config.seed;
    const TextClassifier* model = classifier.get();
    const Label target = model->predict(clean);
    explanation = lime_explain(
        [model](const std::string& t) { return model->predict_proba(t); },
        clean, target, lc);
  } else if (method == "intgrad") {
    const auto* transformer =
        dynamic_cast<const TransformerClassifier*>(classifier.get());
    if (transformer == nullptr) {
      throw UsageError("intgrad needs a transformer checkpoint");
    }
    const Label target = transformer->predict(clean);
    const TokenSeq seq = encode(transformer->vocab(), clean,
                                transformer->params().config.max_len);
    explanation = integrated_gradients(transformer->params(),
                                       transformer->vocab(), seq, target,
                                       config.intgrad_steps);
  } else {
    throw UsageError("unknown explain method '" + method +
                     "' (expected lime or intgrad)");
  }

  nlohmann::json out = explanation_to_json(explanation);
  out["config"] = config_to_json(config);
  write_json_file(workdir_path(config, "explain_" + method + ".json"), out);
  write_text_file(workdir_path(config, "explain_" + method + ".html"),
                  explanation_to_html(explanation));
  return explanation;
}

nlohmann::json cmd_compare(const RunConfig& config) {
  ensure_workdir(config);
  std::vector<std::string> checkpoints;
  for (const auto& entry : fs::directory_iterator(config.workdir)) {
    if (entry.path().extension() == ".ckpt") {
      checkpoints.push_back(entry.path().string());
    }
  }
  std::sort(checkpoints.begin(), checkpoints.end());
  if (checkpoints.empty()) {
    throw DataError("compare: no checkpoints in " + config.workdir);
  }

  const Corpus train_corpus =
      load_tsv(workdir_path(config, "train.tsv"));
  const Corpus test_corpus = load_tsv(workdir_path(config, "test.tsv"));
  std::vector<Label> train_labels, test_labels;
  for (const Message& msg : train_corpus.messages) {
    train_labels.push_back(msg.label);
  }
  for (const Message& msg : test_corpus.messages) {
    test_labels.push_back(msg.label);
  }

  nlohmann::json rows = nlohmann::json::array();
  std::string csv = "# config: " + config_to_json(config).dump() + "\n";
  csv += "model,train_loss,train_acc,test_loss,test_acc\n";
  for (const std::string& path : checkpoints) {
    const auto classifier = classifier_from_checkpoint(load_checkpoint(path));
    const ClassifierEval train_eval = classifier->evaluate_corpus(train_corpus);
    const ClassifierEval test_eval = classifier->evaluate_corpus(test_corpus);
    const double train_acc =
        accuracy(confusion(train_eval.predictions, train_labels));
    const double test_acc =
        accuracy(confusion(test_eval.predictions, test_labels));

    nlohmann::json row = {
        {"model", classifier->kind()},
        {"train_loss", nullptr},
        {"train_acc", train_acc},
        {"test_loss", nullptr},
        {"test_acc", test_acc},
    };
    if (train_eval.loss) row["train_loss"] = *train_eval.loss;
    if (test_eval.loss) row["test_loss"] = *test_eval.loss;
    rows.push_back(row);
    csv += classifier->kind() + "," +
           (train_eval.loss ? fmt6(*train_eval.loss) : "") + "," +
           fmt6(train_acc) + "," +
           (test_eval.loss ? fmt6(*test_eval.loss) : "") + "," +
           fmt6(test_acc) + "\n";
  }

  const nlohmann::json table = {{"models", rows},
                                {"config", config_to_json(config)}};
  write_text_file(workdir_path(config, "compare.csv"), csv);
  write_json_file(workdir_path(config, "compare.json"), table);
  return table;
}

}  // namespace spamlens
