#include "spamlens/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spamlens/errors.hpp"
#include "spamlens/rng.hpp"

namespace spamlens {

namespace {

int label_sign(Label label) { return label == Label::spam ? 1 : -1; }

std::array<double, 2> softmax2(double a, double b) {
  const double m = std::max(a, b);
  const double ea = std::exp(a - m);
  const double eb = std::exp(b - m);
  return {ea / (ea + eb), eb / (ea + eb)};
}

}  // namespace

NaiveBayesModel nb_train(const TermVocab& vocab, const SparseRowMatrix& counts,
                         const std::vector<Label>& labels, double alpha) {
  if (alpha <= 0.0) throw UsageError("nb_train: alpha must be > 0");
  if (counts.rows() == 0) throw DataError("nb_train: no training documents");
  if (static_cast<std::size_t>(counts.rows()) != labels.size()) {
    throw DataError("nb_train: row/label mismatch");
  }

  const auto n_terms = counts.cols();
  Eigen::Matrix<double, 2, Eigen::Dynamic> term_totals =
      Eigen::Matrix<double, 2, Eigen::Dynamic>::Zero(2, n_terms);
  std::array<double, 2> doc_counts{0.0, 0.0};
  for (Eigen::Index row = 0; row < counts.rows(); ++row) {
    const int c = static_cast<int>(labels[static_cast<std::size_t>(row)]);
    doc_counts[static_cast<std::size_t>(c)] += 1.0;
    for (SparseRowMatrix::InnerIterator it(counts, row); it; ++it) {
      term_totals(c, it.col()) += static_cast<double>(it.value());
    }
  }

  NaiveBayesModel model;
  model.vocab = vocab;
  model.alpha = alpha;
  model.log_lik.resize(2, n_terms);
  const auto n_docs = static_cast<double>(counts.rows());
  for (int c = 0; c < 2; ++c) {
    model.log_prior[static_cast<std::size_t>(c)] = static_cast<float>(
        std::log(doc_counts[static_cast<std::size_t>(c)] / n_docs));
    const double total = term_totals.row(c).sum() +
                         alpha * static_cast<double>(n_terms);
    for (Eigen::Index t = 0; t < n_terms; ++t) {
      model.log_lik(c, t) = static_cast<float>(
          std::log((term_totals(c, t) + alpha) / total));
    }
  }
  return model;
}

NaiveBayesModel nb_train(const Corpus& corpus, double alpha) {
  const TermVocab vocab = build_term_vocab(corpus);
  const SparseRowMatrix counts = count_matrix(vocab, corpus);
  std::vector<Label> labels;
  labels.reserve(corpus.size());
  for (const Message& msg : corpus.messages) labels.push_back(msg.label);
  return nb_train(vocab, counts, labels, alpha);
}

std::array<double, 2> nb_predict_proba(const NaiveBayesModel& model,
                                       const SparseVec& counts) {
  if (!model.fitted()) throw DataError("nb_predict: unfitted model");
  std::array<double, 2> log_post{
      static_cast<double>(model.log_prior[0]),
      static_cast<double>(model.log_prior[1])};
  for (SparseVec::InnerIterator it(counts); it; ++it) {
    for (int c = 0; c < 2; ++c) {
      log_post[static_cast<std::size_t>(c)] +=
          static_cast<double>(it.value()) *
          static_cast<double>(model.log_lik(c, it.index()));
    }
  }
  return softmax2(log_post[0], log_post[1]);
}

std::array<double, 2> nb_predict_proba(const NaiveBayesModel& model,
                                       const std::string& text) {
  return nb_predict_proba(model, count_vector(model.vocab, text));
}

Label nb_predict(const NaiveBayesModel& model, const std::string& text) {
  const auto proba = nb_predict_proba(model, text);
  return proba[1] > proba[0] ? Label::spam : Label::ham;
}

std::array<double, 2> knn_vote_fractions(const SparseRowMatrix& train_vectors,
                                         const std::vector<Label>& train_labels,
                                         const SparseVec& query, int k) {
  const auto n = train_vectors.rows();
  if (k < 1 || k > n) throw UsageError("knn: k must be in [1, N]");
  if (static_cast<std::size_t>(n) != train_labels.size()) {
    throw DataError("knn: row/label mismatch");
  }

  // cosine distance; rows and query are l2-normalized so 1 - dot suffices
  std::vector<std::pair<double, Eigen::Index>> dist;
  dist.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index row = 0; row < n; ++row) {
    double dot = 0.0;
    for (SparseRowMatrix::InnerIterator it(train_vectors, row); it; ++it) {
      dot += static_cast<double>(it.value()) *
             static_cast<double>(query.coeff(it.col()));
    }
    dist.emplace_back(1.0 - dot, row);
  }
  std::partial_sort(dist.begin(), dist.begin() + k, dist.end());

  std::array<double, 2> votes{0.0, 0.0};
  for (int i = 0; i < k; ++i) {
    const Label label = train_labels[static_cast<std::size_t>(dist[static_cast<std::size_t>(i)].second)];
    votes[static_cast<std::size_t>(label)] += 1.0;
  }
  return {votes[0] / k, votes[1] / k};
}

Label knn_predict(const SparseRowMatrix& train_vectors,
                  const std::vector<Label>& train_labels,
                  const SparseVec& query, int k) {
  const auto fractions =
      knn_vote_fractions(train_vectors, train_labels, query, k);
  // ties break toward ham
  return fractions[1] > fractions[0] ? Label::spam : Label::ham;
}

KnnModel knn_fit(const Corpus& corpus, int k) {
  KnnModel model;
  auto [tfidf, vectors] = tfidf_fit_transform(corpus);
  model.tfidf = std::move(tfidf);
  model.train_vectors = std::move(vectors);
  model.train_labels.reserve(corpus.size());
  for (const Message& msg : corpus.messages) {
    model.train_labels.push_back(msg.label);
  }
  if (k < 1 || static_cast<std::size_t>(k) > corpus.size()) {
    throw UsageError("knn_fit: k must be in [1, N]");
  }
  model.k = k;
  return model;
}

Label knn_predict(const KnnModel& model, const std::string& text) {
  return knn_predict(model.train_vectors, model.train_labels,
                     tfidf_transform_one(model.tfidf, text), model.k);
}

SvmModel svm_train(const TfidfModel& tfidf, const SparseRowMatrix& vectors,
                   const std::vector<Label>& labels, double lambda, int epochs,
                   std::uint64_t seed,
                   std::vector<double>* epoch_avg_objectives) {
  if (lambda <= 0.0) throw UsageError("svm_train: lambda must be > 0");
  if (epochs < 1) throw UsageError("svm_train: epochs must be >= 1");
  const auto n = vectors.rows();
  if (n == 0) throw DataError("svm_train: no training documents");
  const bool has_ham = std::any_of(labels.begin(), labels.end(),
                                   [](Label l) { return l == Label::ham; });
  const bool has_spam = std::any_of(labels.begin(), labels.end(),
                                    [](Label l) { return l == Label::spam; });
  if (!has_ham || !has_spam) {
    throw DataError("svm_train: training set must contain both classes");
  }

  Eigen::VectorXd w = Eigen::VectorXd::Zero(vectors.cols());
  Eigen::VectorXd w_sum = Eigen::VectorXd::Zero(vectors.cols());
  double b = 0.0;
  double b_sum = 0.0;
  long t = 0;
  std::vector<std::size_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    Rng rng(Rng::derive(seed, 0x5A11F + static_cast<std::uint64_t>(epoch)));
    rng.shuffle(order);
    for (std::size_t idx : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const auto row = static_cast<Eigen::Index>(idx);
      double margin = b;
      for (SparseRowMatrix::InnerIterator it(vectors, row); it; ++it) {
        margin += w(it.col()) * static_cast<double>(it.value());
      }
      const int y = label_sign(labels[idx]);
      w *= (1.0 - eta * lambda);
      if (static_cast<double>(y) * margin < 1.0) {
        for (SparseRowMatrix::InnerIterator it(vectors, row); it; ++it) {
          w(it.col()) += eta * y * static_cast<double>(it.value());
        }
        b += eta * y;
      }
      w_sum += w;
      b_sum += b;
    }
    if (epoch_avg_objectives != nullptr) {
      const double inv_t = 1.0 / static_cast<double>(t);
      epoch_avg_objectives->push_back(
          svm_objective(w_sum * inv_t, b_sum * inv_t, vectors, labels, lambda));
    }
  }

  SvmModel model;
  model.tfidf = tfidf;
  model.weights = w.cast<float>();
  model.bias = static_cast<float>(b);
  model.lambda = lambda;
  return model;
}

SvmModel svm_train(const Corpus& corpus, double lambda, int epochs,
                   std::uint64_t seed) {
  auto [tfidf, vectors] = tfidf_fit_transform(corpus);
  std::vector<Label> labels;
  labels.reserve(corpus.size());
  for (const Message& msg : corpus.messages) labels.push_back(msg.label);
  return svm_train(tfidf, vectors, labels, lambda, epochs, seed);
}

double svm_margin(const SvmModel& model, const SparseVec& vector) {
  double margin = static_cast<double>(model.bias);
  for (SparseVec::InnerIterator it(vector); it; ++it) {
    margin += static_cast<double>(model.weights(it.index())) *
              static_cast<double>(it.value());
  }
  return margin;
}

Label svm_predict(const SvmModel& model, const std::string& text) {
  return svm_margin(model, tfidf_transform_one(model.tfidf, text)) > 0.0
             ? Label::spam
             : Label::ham;
}

double svm_objective(const Eigen::VectorXd& weights, double bias,
                     const SparseRowMatrix& vectors,
                     const std::vector<Label>& labels, double lambda) {
  double hinge = 0.0;
  for (Eigen::Index row = 0; row < vectors.rows(); ++row) {
    double margin = bias;
    for (SparseRowMatrix::InnerIterator it(vectors, row); it; ++it) {
      margin += weights(it.col()) * static_cast<double>(it.value());
    }
    const int y = label_sign(labels[static_cast<std::size_t>(row)]);
    hinge += std::max(0.0, 1.0 - static_cast<double>(y) * margin);
  }
  hinge /= static_cast<double>(vectors.rows());
  return 0.5 * lambda * weights.squaredNorm() + hinge;
}

}  // namespace spamlens
