#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "spamlens/tfidf.hpp"

namespace spamlens {

// ---------------------------------------------------------------------------
// Multinomial naive Bayes over raw token counts with Laplace smoothing.
// ---------------------------------------------------------------------------

struct NaiveBayesModel {
  TermVocab vocab;
  std::array<float, 2> log_prior{};                 // ham, spam
  Eigen::Matrix<float, 2, Eigen::Dynamic> log_lik;  // [class × term]
  double alpha = 1.0;

  bool fitted() const { return log_lik.cols() > 0; }
};

NaiveBayesModel nb_train(const TermVocab& vocab, const SparseRowMatrix& counts,
                         const std::vector<Label>& labels, double alpha = 1.0);
NaiveBayesModel nb_train(const Corpus& corpus, double alpha = 1.0);

// (ham, spam) posterior probabilities; rows sum to 1.
std::array<double, 2> nb_predict_proba(const NaiveBayesModel& model,
                                       const SparseVec& counts);
std::array<double, 2> nb_predict_proba(const NaiveBayesModel& model,
                                       const std::string& text);
Label nb_predict(const NaiveBayesModel& model, const std::string& text);

// ---------------------------------------------------------------------------
// K-nearest-neighbour majority vote under cosine distance. Vote ties break
// toward ham (the smaller label id).
// ---------------------------------------------------------------------------

struct KnnModel {
  TfidfModel tfidf;
  SparseRowMatrix train_vectors;  // l2-normalized rows
  std::vector<Label> train_labels;
  int k = 5;
};

Label knn_predict(const SparseRowMatrix& train_vectors,
                  const std::vector<Label>& train_labels,
                  const SparseVec& query, int k);
std::array<double, 2> knn_vote_fractions(const SparseRowMatrix& train_vectors,
                                         const std::vector<Label>& train_labels,
                                         const SparseVec& query, int k);
KnnModel knn_fit(const Corpus& corpus, int k);
Label knn_predict(const KnnModel& model, const std::string& text);

// ---------------------------------------------------------------------------
// Linear SVM trained by primal sub-gradient descent on the hinge loss with
// an L2 penalty (step size 1/(lambda*t), seeded sample order). The bias is
// unregularized.
// ---------------------------------------------------------------------------

struct SvmModel {
  TfidfModel tfidf;
  Eigen::VectorXf weights;
  float bias = 0.0f;
  double lambda = 1e-4;
};

// When `epoch_avg_objectives` is given it receives, per epoch, the objective
// of the running average of all iterates seen so far.
SvmModel svm_train(const TfidfModel& tfidf, const SparseRowMatrix& vectors,
                   const std::vector<Label>& labels, double lambda, int epochs,
                   std::uint64_t seed,
                   std::vector<double>* epoch_avg_objectives = nullptr);
SvmModel svm_train(const Corpus& corpus, double lambda = 1e-4, int epochs = 10,
                   std::uint64_t seed = 0);

double svm_margin(const SvmModel& model, const SparseVec& vector);
Label svm_predict(const SvmModel& model, const std::string& text);

// lambda/2 ||w||^2 + mean hinge loss over the dataset.
double svm_objective(const Eigen::VectorXd& weights, double bias,
                     const SparseRowMatrix& vectors,
                     const std::vector<Label>& labels, double lambda);

}  // namespace spamlens
