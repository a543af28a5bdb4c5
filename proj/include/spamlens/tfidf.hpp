#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <string>
#include <unordered_map>
#include <vector>

#include "spamlens/corpus.hpp"

namespace spamlens {

using SparseRowMatrix = Eigen::SparseMatrix<float, Eigen::RowMajor>;
using SparseVec = Eigen::SparseVector<float>;

// Whitespace-token vocabulary over a corpus, lexicographically ordered so
// column assignment is independent of document order.
struct TermVocab {
  std::vector<std::string> terms;
  std::unordered_map<std::string, int> index;

  int term_id(const std::string& term) const {
    auto it = index.find(term);
    return it == index.end() ? -1 : it->second;
  }
  std::size_t size() const { return terms.size(); }
};

TermVocab build_term_vocab(const Corpus& corpus);

// Raw term-count document vectors.
SparseRowMatrix count_matrix(const TermVocab& vocab, const Corpus& corpus);
SparseVec count_vector(const TermVocab& vocab, const std::string& text);

// Smooth-idf weighting: idf[t] = ln((1+N)/(1+df_t)) + 1; document vectors
// are tf*idf, l2-normalized (the zero vector stays zero).
struct TfidfModel {
  TermVocab vocab;
  Eigen::VectorXf idf;
};

TfidfModel tfidf_fit(const Corpus& corpus);
SparseRowMatrix tfidf_transform(const TfidfModel& model, const Corpus& corpus);
SparseVec tfidf_transform_one(const TfidfModel& model, const std::string& text);

inline std::pair<TfidfModel, SparseRowMatrix> tfidf_fit_transform(
    const Corpus& corpus) {
  TfidfModel model = tfidf_fit(corpus);
  SparseRowMatrix vectors = tfidf_transform(model, corpus);
  return {std::move(model), std::move(vectors)};
}

}  // namespace spamlens
