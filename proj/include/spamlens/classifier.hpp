#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>

#include "spamlens/baselines.hpp"
#include "spamlens/bpe.hpp"
#include "spamlens/checkpoint.hpp"
#include "spamlens/transformer.hpp"

namespace spamlens {

struct ClassifierEval {
  std::optional<double> loss;  // model-appropriate loss; nullopt for knn
  std::vector<Label> predictions;
};

// Uniform prediction surface over every trained model kind; inputs are
// preprocessed texts.
class TextClassifier {
 public:
  virtual ~TextClassifier() = default;

  virtual std::array<double, 2> predict_proba(
      const std::string& clean_text) const = 0;
  virtual std::string kind() const = 0;

  // Predictions plus the model's loss over a corpus; the default walks
  // predict_proba and reports mean negative log-likelihood.
  virtual ClassifierEval evaluate_corpus(const Corpus& corpus) const;

  Label predict(const std::string& clean_text) const {
    const auto proba = predict_proba(clean_text);
    return proba[1] > proba[0] ? Label::spam : Label::ham;
  }
};

class TransformerClassifier : public TextClassifier {
 public:
  TransformerClassifier(ModelParams<float> params, Vocab vocab)
      : params_(std::move(params)), vocab_(std::move(vocab)) {}

  std::array<double, 2> predict_proba(
      const std::string& clean_text) const override;
  std::string kind() const override { return "transformer"; }
  // batched eval-mode pass
  ClassifierEval evaluate_corpus(const Corpus& corpus) const override;

  const ModelParams<float>& params() const { return params_; }
  const Vocab& vocab() const { return vocab_; }

 private:
  ModelParams<float> params_;
  Vocab vocab_;
};

class NaiveBayesClassifier : public TextClassifier {
 public:
  explicit NaiveBayesClassifier(NaiveBayesModel model)
      : model_(std::move(model)) {}

  std::array<double, 2> predict_proba(
      const std::string& clean_text) const override {
    return nb_predict_proba(model_, clean_text);
  }
  std::string kind() const override { return "nb"; }

  const NaiveBayesModel& model() const { return model_; }

 private:
  NaiveBayesModel model_;
};

class KnnClassifier : public TextClassifier {
 public:
  explicit KnnClassifier(KnnModel model) : model_(std::move(model)) {}

  std::array<double, 2> predict_proba(
      const std::string& clean_text) const override {
    return knn_vote_fractions(model_.train_vectors, model_.train_labels,
                              tfidf_transform_one(model_.tfidf, clean_text),
                              model_.k);
  }
  std::string kind() const override { return "knn"; }
  // vote fractions have no likelihood reading, so no loss is reported
  ClassifierEval evaluate_corpus(const Corpus& corpus) const override;

  const KnnModel& model() const { return model_; }

 private:
  KnnModel model_;
};

class SvmClassifier : public TextClassifier {
 public:
  explicit SvmClassifier(SvmModel model) : model_(std::move(model)) {}

  // Probabilities via a logistic squash of the margin; the decision
  // boundary stays sign(w.x + b).
  std::array<double, 2> predict_proba(
      const std::string& clean_text) const override;
  std::string kind() const override { return "svm"; }
  // mean hinge loss rather than NLL
  ClassifierEval evaluate_corpus(const Corpus& corpus) const override;

  const SvmModel& model() const { return model_; }

 private:
  SvmModel model_;
};

// Checkpoint conversions. `config` is the run-config snapshot stored in the
// manifest verbatim.
Checkpoint to_checkpoint(const TransformerClassifier& classifier,
                         nlohmann::json config);
Checkpoint to_checkpoint(const NaiveBayesClassifier& classifier,
                         nlohmann::json config);
Checkpoint to_checkpoint(const KnnClassifier& classifier,
                         nlohmann::json config);
Checkpoint to_checkpoint(const SvmClassifier& classifier,
                         nlohmann::json config);

std::unique_ptr<TextClassifier> classifier_from_checkpoint(
    const Checkpoint& checkpoint);

}  // namespace spamlens
