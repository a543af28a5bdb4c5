#include "spamlens/tfidf.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "spamlens/errors.hpp"

namespace spamlens {

namespace {

std::map<std::string, int> term_counts(const std::string& text) {
  std::map<std::string, int> counts;
  std::istringstream in(text);
  std::string term;
  while (in >> term) ++counts[term];
  return counts;
}

}  // namespace

TermVocab build_term_vocab(const Corpus& corpus) {
  if (corpus.empty()) throw DataError("term vocab: empty corpus");
  std::map<std::string, int> seen;  // ordered -> lexicographic columns
  for (const Message& msg : corpus.messages) {
    for (const auto& [term, _] : term_counts(msg.text)) seen[term] += 1;
  }
  TermVocab vocab;
  vocab.terms.reserve(seen.size());
  for (const auto& [term, _] : seen) {
    vocab.index.emplace(term, static_cast<int>(vocab.terms.size()));
    vocab.terms.push_back(term);
  }
  return vocab;
}

SparseVec count_vector(const TermVocab& vocab, const std::string& text) {
  SparseVec vec(static_cast<Eigen::Index>(vocab.size()));
  for (const auto& [term, count] : term_counts(text)) {
    const int id = vocab.term_id(term);
    if (id >= 0) vec.coeffRef(id) = static_cast<float>(count);
  }
  return vec;
}

SparseRowMatrix count_matrix(const TermVocab& vocab, const Corpus& corpus) {
  SparseRowMatrix mat(static_cast<Eigen::Index>(corpus.size()),
                      static_cast<Eigen::Index>(vocab.size()));
  std::vector<Eigen::Triplet<float>> triplets;
  for (std::size_t row = 0; row < corpus.size(); ++row) {
    for (const auto& [term, count] : term_counts(corpus.messages[row].text)) {
      const int id = vocab.term_id(term);
      if (id >= 0) {
        triplets.emplace_back(static_cast<int>(row), id,
                              static_cast<float>(count));
      }
    }
  }
  mat.setFromTriplets(triplets.begin(), triplets.end());
  return mat;
}

TfidfModel tfidf_fit(const Corpus& corpus) {
  TfidfModel model;
  model.vocab = build_term_vocab(corpus);
  const auto n_docs = static_cast<double>(corpus.size());
  Eigen::VectorXd df = Eigen::VectorXd::Zero(
      static_cast<Eigen::Index>(model.vocab.size()));
  for (const Message& msg : corpus.messages) {
    for (const auto& [term, _] : term_counts(msg.text)) {
      const int id = model.vocab.term_id(term);
      if (id >= 0) df(id) += 1.0;
    }
  }
  const Eigen::ArrayXd idf = ((1.0 + n_docs) / (1.0 + df.array())).log() + 1.0;
  model.idf = idf.cast<float>().matrix();
  return model;
}

SparseVec tfidf_transform_one(const TfidfModel& model,
                              const std::string& text) {
  SparseVec vec(static_cast<Eigen::Index>(model.vocab.size()));
  double norm_sq = 0.0;
  std::vector<std::pair<int, double>> entries;
  for (const auto& [term, count] : term_counts(text)) {
    const int id = model.vocab.term_id(term);
    if (id < 0) continue;
    const double value =
        static_cast<double>(count) * static_cast<double>(model.idf(id));
    entries.emplace_back(id, value);
    norm_sq += value * value;
  }
  const double norm = std::sqrt(norm_sq);
  for (const auto& [id, value] : entries) {
    vec.coeffRef(id) = static_cast<float>(norm > 0.0 ? value / norm : 0.0);
  }
  return vec;
}

SparseRowMatrix tfidf_transform(const TfidfModel& model, const Corpus& corpus) {
  SparseRowMatrix mat(static_cast<Eigen::Index>(corpus.size()),
                      static_cast<Eigen::Index>(model.vocab.size()));
  std::vector<Eigen::Triplet<float>> triplets;
  for (std::size_t row = 0; row < corpus.size(); ++row) {
    const SparseVec vec = tfidf_transform_one(model, corpus.messages[row].text);
    for (SparseVec::InnerIterator it(vec); it; ++it) {
      triplets.emplace_back(static_cast<int>(row),
                            static_cast<int>(it.index()), it.value());
    }
  }
  mat.setFromTriplets(triplets.begin(), triplets.end());
  return mat;
}

}  // namespace spamlens
