#pragma once

#include <functional>
#include <utility>

#include "spamlens/explain.hpp"
#include "spamlens/train.hpp"
#include "spamlens/transformer.hpp"

namespace spamlens {

// Scalar function of an embedding matrix together with its gradient.
using EmbeddingFn = std::function<std::pair<double, Eigen::MatrixXd>(
    const Eigen::MatrixXd& embeddings)>;

struct IgPathResult {
  Eigen::VectorXd token_attributions;  // one entry per sequence position
  double raw_sum = 0.0;
  double f_input = 0.0;
  double f_baseline = 0.0;
};

// Left Riemann approximation of the straight-line path integral from
// `baseline` to `input`: attributions_i = sum_dim (input - baseline)_i *
// mean_k grad F(baseline + (k/steps) * delta)_i. Exact for F linear in the
// embeddings at any step count; raw_sum approaches F(input) - F(baseline)
// as steps grow (completeness).
IgPathResult integrate_embedding_path(const EmbeddingFn& fn,
                                      const Eigen::MatrixXd& baseline,
                                      const Eigen::MatrixXd& input, int steps);

// Integrated gradients for the encoder classifier: the baseline replaces
// every non-special token with [PAD] (keeping the attention mask), F is the
// softmax probability of the target class, and token attributions are merged
// into words. Reported coefficients are l2-normalized; raw_sum keeps the
// unnormalized total.
template <class S>
Explanation integrated_gradients(const ModelParams<S>& params,
                                 const Vocab& vocab, const TokenSeq& seq,
                                 Label target_class, int steps = 50) {
  if (steps < 1) throw UsageError("integrated_gradients: steps must be >= 1");
  const int target = static_cast<int>(target_class);

  Batch batch = Batch::from_seqs(std::span<const TokenSeq>(&seq, 1));
  batch = trim_batch<S>(batch);
  const auto len = batch.len();

  Batch baseline_batch = batch;
  for (Eigen::Index i = 0; i < len; ++i) {
    const int id = baseline_batch.ids(0, i);
    if (id != kPadId && id != kClsId && id != kSepId) {
      baseline_batch.ids(0, i) = kPadId;
    }
  }

  const Eigen::MatrixXd input_emb =
      lookup_embeddings(params, batch)[0].template cast<double>();
  const Eigen::MatrixXd baseline_emb =
      lookup_embeddings(params, baseline_batch)[0].template cast<double>();

  const EmbeddingFn fn = [&](const Eigen::MatrixXd& emb)
      -> std::pair<double, Eigen::MatrixXd> {
    std::vector<Mat<S>> embeds;
    embeds.push_back(emb.cast<S>());
    auto fwd = forward_embedded(params, std::move(embeds), batch,
                                /*train_mode=*/false, nullptr);
    const Eigen::RowVectorXd row = fwd.logits.row(0).template cast<double>();
    const double m = row.maxCoeff();
    const Eigen::RowVectorXd e = (row.array() - m).exp().matrix();
    const Eigen::RowVectorXd p = e / e.sum();
    // dF/dlogit_j for F = softmax_target
    Mat<S> dlogits(1, row.size());
    for (Eigen::Index j = 0; j < row.size(); ++j) {
      const double delta = j == target ? 1.0 : 0.0;
      dlogits(0, j) = static_cast<S>(p(target) * (delta - p(j)));
    }
    auto bwd = backward(params, fwd.cache, dlogits);
    return {p(target), bwd.d_embeds[0].template cast<double>()};
  };

  const IgPathResult path =
      integrate_embedding_path(fn, baseline_emb, input_emb, steps);

  std::vector<std::pair<std::string, double>> piece_attrs;
  for (Eigen::Index i = 0; i < len; ++i) {
    piece_attrs.emplace_back(
        vocab.pieces[static_cast<std::size_t>(batch.ids(0, i))],
        path.token_attributions(i));
  }

  Explanation explanation;
  explanation.method = "intgrad";
  explanation.target_class = target_class;
  explanation.prediction = path.f_input;
  explanation.raw_sum = path.raw_sum;
  explanation.has_raw_sum = true;
  explanation.attributions = merge_subwords(piece_attrs);
  double norm = 0.0;
  for (const auto& attr : explanation.attributions) {
    norm += attr.coefficient * attr.coefficient;
  }
  norm = std::sqrt(norm);
  if (norm > 0.0) {
    for (auto& attr : explanation.attributions) attr.coefficient /= norm;
  }
  sort_by_magnitude(explanation.attributions);
  return explanation;
}

}  // namespace spamlens
