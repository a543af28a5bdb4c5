#include "spamlens/classifier.hpp"

#include <cmath>

#include "spamlens/errors.hpp"
#include "spamlens/train.hpp"

namespace spamlens {

namespace {

constexpr double kIndexLimit = 16777216.0;  // 2^24, exact in float32

nlohmann::json terms_to_json(const TermVocab& vocab) {
  return nlohmann::json(vocab.terms);
}

TermVocab terms_from_json(const nlohmann::json& terms) {
  TermVocab vocab;
  for (const auto& term : terms) {
    vocab.index.emplace(term.get<std::string>(),
                        static_cast<int>(vocab.terms.size()));
    vocab.terms.push_back(term.get<std::string>());
  }
  return vocab;
}

Eigen::MatrixXf vec_to_tensor(const Eigen::VectorXf& v) {
  return Eigen::MatrixXf(v);
}

TfidfModel tfidf_from_checkpoint(const Checkpoint& ckpt) {
  TfidfModel model;
  model.vocab = terms_from_json(ckpt.meta.at("terms"));
  model.idf = ckpt.tensor("idf").col(0);
  if (model.idf.size() != static_cast<Eigen::Index>(model.vocab.size())) {
    throw DataError("checkpoint: idf size does not match vocabulary");
  }
  return model;
}

}  // namespace

ClassifierEval TextClassifier::evaluate_corpus(const Corpus& corpus) const {
  ClassifierEval eval;
  if (corpus.empty()) return eval;
  double sum = 0.0;
  for (const Message& msg : corpus.messages) {
    const auto proba = predict_proba(msg.text);
    sum += -std::log(
        std::max(proba[static_cast<std::size_t>(msg.label)], 1e-300));
    eval.predictions.push_back(proba[1] > proba[0] ? Label::spam : Label::ham);
  }
  eval.loss = sum / static_cast<double>(corpus.size());
  return eval;
}

std::array<double, 2> TransformerClassifier::predict_proba(
    const std::string& clean_text) const {
  const TokenSeq seq = encode(vocab_, clean_text, params_.config.max_len);
  const Batch batch = Batch::from_seqs(std::span<const TokenSeq>(&seq, 1));
  const Eigen::MatrixXd probs = spamlens::predict_proba(params_, batch);
  return {probs(0, 0), probs(0, 1)};
}

ClassifierEval TransformerClassifier::evaluate_corpus(
    const Corpus& corpus) const {
  ClassifierEval eval;
  if (corpus.empty()) return eval;
  std::vector<TokenSeq> seqs;
  std::vector<int> labels;
  seqs.reserve(corpus.size());
  for (const Message& msg : corpus.messages) {
    seqs.push_back(encode(vocab_, msg.text, params_.config.max_len));
    labels.push_back(static_cast<int>(msg.label));
  }
  EvalStats stats = evaluate(params_, seqs, labels, 64);
  eval.loss = stats.loss;
  eval.predictions = std::move(stats.predictions);
  return eval;
}

ClassifierEval KnnClassifier::evaluate_corpus(const Corpus& corpus) const {
  ClassifierEval eval;
  for (const Message& msg : corpus.messages) {
    eval.predictions.push_back(predict(msg.text));
  }
  return eval;
}

std::array<double, 2> SvmClassifier::predict_proba(
    const std::string& clean_text) const {
  const double margin =
      svm_margin(model_, tfidf_transform_one(model_.tfidf, clean_text));
  const double p_spam = 1.0 / (1.0 + std::exp(-margin));
  return {1.0 - p_spam, p_spam};
}

ClassifierEval SvmClassifier::evaluate_corpus(const Corpus& corpus) const {
  ClassifierEval eval;
  if (corpus.empty()) return eval;
  double sum = 0.0;
  for (const Message& msg : corpus.messages) {
    const double margin =
        svm_margin(model_, tfidf_transform_one(model_.tfidf, msg.text));
    const double y = msg.label == Label::spam ? 1.0 : -1.0;
    sum += std::max(0.0, 1.0 - y * margin);
    eval.predictions.push_back(margin > 0.0 ? Label::spam : Label::ham);
  }
  eval.loss = sum / static_cast<double>(corpus.size());
  return eval;
}

Checkpoint to_checkpoint(const TransformerClassifier& classifier,
                         nlohmann::json config) {
  Checkpoint ckpt;
  ckpt.model_kind = "transformer";
  ckpt.config = std::move(config);

  const ModelConfig& mc = classifier.params().config;
  nlohmann::json merges = nlohmann::json::array();
  for (const auto& rule : classifier.vocab().merges) {
    merges.push_back({rule.left, rule.right});
  }
  ckpt.meta = {
      {"model",
       {{"n_layers", mc.n_layers},
        {"d_model", mc.d_model},
        {"n_heads", mc.n_heads},
        {"d_ff", mc.d_ff},
        {"max_len", mc.max_len},
        {"vocab_size", mc.vocab_size},
        {"dropout_rate", mc.dropout_rate}}},
      {"tokenizer",
       {{"pieces", classifier.vocab().pieces}, {"merges", merges}}},
  };

  ModelParams<float> params = classifier.params();
  for (const auto& view : param_views(params)) {
    Eigen::MatrixXf tensor(view.rows, view.cols);
    std::copy(view.data, view.data + view.size(), tensor.data());
    ckpt.tensors.emplace_back(view.name, std::move(tensor));
  }
  return ckpt;
}

Checkpoint to_checkpoint(const NaiveBayesClassifier& classifier,
                         nlohmann::json config) {
  const NaiveBayesModel& model = classifier.model();
  Checkpoint ckpt;
  ckpt.model_kind = "nb";
  ckpt.config = std::move(config);
  ckpt.meta = {{"alpha", model.alpha}, {"terms", terms_to_json(model.vocab)}};
  Eigen::MatrixXf prior(1, 2);
  prior << model.log_prior[0], model.log_prior[1];
  ckpt.tensors.emplace_back("log_prior", prior);
  ckpt.tensors.emplace_back("log_lik", Eigen::MatrixXf(model.log_lik));
  return ckpt;
}

Checkpoint to_checkpoint(const KnnClassifier& classifier,
                         nlohmann::json config) {
  const KnnModel& model = classifier.model();
  Checkpoint ckpt;
  ckpt.model_kind = "knn";
  ckpt.config = std::move(config);
  ckpt.meta = {{"k", model.k}, {"terms", terms_to_json(model.tfidf.vocab)}};
  ckpt.tensors.emplace_back("idf", vec_to_tensor(model.tfidf.idf));

  const SparseRowMatrix& vectors = model.train_vectors;
  const auto nnz = vectors.nonZeros();
  const auto rows = vectors.rows();
  if (double(nnz) >= kIndexLimit || double(vectors.cols()) >= kIndexLimit) {
    throw DataError("knn checkpoint: index exceeds exact float32 range");
  }
  Eigen::MatrixXf values(nnz, 1), col_index(nnz, 1), row_ptr(rows + 1, 1);
  Eigen::Index cursor = 0;
  for (Eigen::Index row = 0; row < rows; ++row) {
    row_ptr(row, 0) = static_cast<float>(cursor);
    for (SparseRowMatrix::InnerIterator it(vectors, row); it; ++it) {
      values(cursor, 0) = it.value();
      col_index(cursor, 0) = static_cast<float>(it.col());
      ++cursor;
    }
  }
  row_ptr(rows, 0) = static_cast<float>(cursor);
  ckpt.tensors.emplace_back("train_values", std::move(values));
  ckpt.tensors.emplace_back("train_col_index", std::move(col_index));
  ckpt.tensors.emplace_back("train_row_ptr", std::move(row_ptr));

  Eigen::MatrixXf labels(rows, 1);
  for (Eigen::Index row = 0; row < rows; ++row) {
    labels(row, 0) = static_cast<float>(
        static_cast<int>(model.train_labels[static_cast<std::size_t>(row)]));
  }
  ckpt.tensors.emplace_back("train_labels", std::move(labels));
  return ckpt;
}

Checkpoint to_checkpoint(const SvmClassifier& classifier,
                         nlohmann::json config) {
  const SvmModel& model = classifier.model();
  Checkpoint ckpt;
  ckpt.model_kind = "svm";
  ckpt.config = std::move(config);
  ckpt.meta = {{"lambda", model.lambda},
               {"terms", terms_to_json(model.tfidf.vocab)}};
  ckpt.tensors.emplace_back("idf", vec_to_tensor(model.tfidf.idf));
  ckpt.tensors.emplace_back("weights", vec_to_tensor(model.weights));
  Eigen::MatrixXf bias(1, 1);
  bias(0, 0) = model.bias;
  ckpt.tensors.emplace_back("bias", bias);
  return ckpt;
}

std::unique_ptr<TextClassifier> classifier_from_checkpoint(
    const Checkpoint& ckpt) {
  if (ckpt.model_kind == "transformer") {
    const auto& mj = ckpt.meta.at("model");
    ModelConfig config;
    config.n_layers = mj.at("n_layers").get<int>();
    config.d_model = mj.at("d_model").get<int>();
    config.n_heads = mj.at("n_heads").get<int>();
    config.d_ff = mj.at("d_ff").get<int>();
    config.max_len = mj.at("max_len").get<int>();
    config.vocab_size = mj.at("vocab_size").get<int>();
    config.dropout_rate = mj.at("dropout_rate").get<double>();

    Vocab vocab;
    for (const auto& piece : ckpt.meta.at("tokenizer").at("pieces")) {
      vocab.pieces.push_back(piece.get<std::string>());
    }
    for (const auto& pair : ckpt.meta.at("tokenizer").at("merges")) {
      MergeRule rule;
      rule.left = pair.at(0).get<std::string>();
      rule.right = pair.at(1).get<std::string>();
      const std::string tail = rule.right.rfind("##", 0) == 0
                                   ? rule.right.substr(2)
                                   : rule.right;
      rule.output = rule.left + tail;
      vocab.merges.push_back(std::move(rule));
    }
    vocab.rebuild_index();

    ModelParams<float> params = init_params<float>(config, 0);
    for (const auto& view : param_views(params)) {
      const Eigen::MatrixXf& tensor = ckpt.tensor(view.name);
      if (tensor.rows() != view.rows || tensor.cols() != view.cols) {
        throw DataError("checkpoint tensor '" + view.name +
                        "' has unexpected shape");
      }
      std::copy(tensor.data(), tensor.data() + tensor.size(), view.data);
    }
    return std::make_unique<TransformerClassifier>(std::move(params),
                                                   std::move(vocab));
  }

  if (ckpt.model_kind == "nb") {
    NaiveBayesModel model;
    model.vocab = terms_from_json(ckpt.meta.at("terms"));
    model.alpha = ckpt.meta.at("alpha").get<double>();
    const Eigen::MatrixXf& prior = ckpt.tensor("log_prior");
    model.log_prior = {prior(0, 0), prior(0, 1)};
    model.log_lik = ckpt.tensor("log_lik");
    if (model.log_lik.cols() !=
        static_cast<Eigen::Index>(model.vocab.size())) {
      throw DataError("checkpoint: nb likelihood does not match vocabulary");
    }
    return std::make_unique<NaiveBayesClassifier>(std::move(model));
  }

  if (ckpt.model_kind == "knn") {
    KnnModel model;
    model.tfidf = tfidf_from_checkpoint(ckpt);
    model.k = ckpt.meta.at("k").get<int>();
    const Eigen::MatrixXf& values = ckpt.tensor("train_values");
    const Eigen::MatrixXf& col_index = ckpt.tensor("train_col_index");
    const Eigen::MatrixXf& row_ptr = ckpt.tensor("train_row_ptr");
    const Eigen::MatrixXf& labels = ckpt.tensor("train_labels");
    const auto rows = row_ptr.rows() - 1;
    model.train_vectors.resize(rows,
                               static_cast<Eigen::Index>(model.tfidf.vocab.size()));
    std::vector<Eigen::Triplet<float>> triplets;
    for (Eigen::Index row = 0; row < rows; ++row) {
      const auto begin = static_cast<Eigen::Index>(row_ptr(row, 0));
      const auto end = static_cast<Eigen::Index>(row_ptr(row + 1, 0));
      for (Eigen::Index i = begin; i < end; ++i) {
        triplets.emplace_back(static_cast<int>(row),
                              static_cast<int>(col_index(i, 0)),
                              values(i, 0));
      }
    }
    model.train_vectors.setFromTriplets(triplets.begin(), triplets.end());
    model.train_labels.reserve(static_cast<std::size_t>(rows));
    for (Eigen::Index row = 0; row < rows; ++row) {
      model.train_labels.push_back(labels(row, 0) > 0.5f ? Label::spam
                                                         : Label::ham);
    }
    return std::make_unique<KnnClassifier>(std::move(model));
  }

  if (ckpt.model_kind == "svm") {
    SvmModel model;
    model.tfidf = tfidf_from_checkpoint(ckpt);
    model.lambda = ckpt.meta.at("lambda").get<double>();
    model.weights = ckpt.tensor("weights").col(0);
    model.bias = ckpt.tensor("bias")(0, 0);
    return std::make_unique<SvmClassifier>(std::move(model));
  }

  throw DataError("unknown model kind in checkpoint: " + ckpt.model_kind);
}

}  // namespace spamlens
