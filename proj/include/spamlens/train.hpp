#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "spamlens/corpus.hpp"
#include "spamlens/errors.hpp"
#include "spamlens/transformer.hpp"

namespace spamlens {

struct TrainConfig {
  int epochs = 5;
  int train_batch = 32;
  int eval_batch = 64;
  double learning_rate = 3e-4;  // from-scratch default; 2e-5 works when set
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;

  void validate() const {
    if (epochs < 1) throw UsageError("train config: epochs must be >= 1");
    if (train_batch < 1 || eval_batch < 1) {
      throw UsageError("train config: batch sizes must be >= 1");
    }
    if (learning_rate < 0.0) {
      throw UsageError("train config: learning_rate must be >= 0");
    }
  }
};

template <class S>
struct CrossEntropyResult {
  double loss = 0.0;
  Mat<S> dlogits;
};

// Mean over the batch of -log softmax(logits)[label], stabilized by max
// subtraction; the gradient is (softmax - onehot) / batch.
template <class S>
CrossEntropyResult<S> cross_entropy(const Mat<S>& logits,
                                    const std::vector<int>& labels) {
  if (static_cast<std::size_t>(logits.rows()) != labels.size()) {
    throw DataError("cross_entropy: logit/label count mismatch");
  }
  const auto batch = logits.rows();
  CrossEntropyResult<S> result;
  result.dlogits.resize(batch, logits.cols());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < batch; ++i) {
    const int label = labels[static_cast<std::size_t>(i)];
    if (label < 0 || label >= logits.cols()) {
      throw DataError("cross_entropy: label out of range");
    }
    const Eigen::RowVectorXd row = logits.row(i).template cast<double>();
    const double m = row.maxCoeff();
    const Eigen::RowVectorXd e = (row.array() - m).exp().matrix();
    const double z = e.sum();
    loss += -(row(label) - m - std::log(z));
    const Eigen::RowVectorXd softmax = e / z;
    for (Eigen::Index j = 0; j < logits.cols(); ++j) {
      const double grad =
          (softmax(j) - (j == label ? 1.0 : 0.0)) / double(batch);
      result.dlogits(i, j) = static_cast<S>(grad);
    }
  }
  result.loss = loss / double(batch);
  return result;
}

template <class S>
struct AdamWState {
  long step = 0;
  std::vector<Vec<S>> m;
  std::vector<Vec<S>> v;
};

template <class S>
AdamWState<S> adamw_init(ModelParams<S>& params) {
  AdamWState<S> state;
  for (const auto& view : param_views(params)) {
    state.m.push_back(Vec<S>::Zero(view.size()));
    state.v.push_back(Vec<S>::Zero(view.size()));
  }
  return state;
}

// Decoupled weight decay: the decay term lr*wd*p acts on the parameter
// directly and bypasses the moment estimates.
template <class S>
void adamw_step(ModelParams<S>& params, ModelParams<S>& grads,
                AdamWState<S>& state, const TrainConfig& config) {
  auto p_views = param_views(params);
  auto g_views = param_views(grads);
  if (state.m.size() != p_views.size()) {
    throw DataError("adamw: state/param tensor count mismatch");
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(config.beta1, double(state.step));
  const double bc2 = 1.0 - std::pow(config.beta2, double(state.step));
  for (std::size_t i = 0; i < p_views.size(); ++i) {
    Eigen::Map<Vec<S>> p(p_views[i].data, p_views[i].size());
    Eigen::Map<const Vec<S>> grad(g_views[i].data, g_views[i].size());
    if (!grad.allFinite()) {
      throw DataError("adamw: non-finite gradient in tensor '" +
                      p_views[i].name + "'");
    }
    Vec<S>& m = state.m[i];
    Vec<S>& v = state.v[i];
    m = S(config.beta1) * m + S(1.0 - config.beta1) * grad;
    v = (S(config.beta2) * v.array() +
         S(1.0 - config.beta2) * grad.array().square())
            .matrix();
    const auto m_hat = m.array() / S(bc1);
    const auto v_hat = v.array() / S(bc2);
    p.array() -= S(config.learning_rate) *
                 (m_hat / (v_hat.sqrt() + S(config.epsilon)) +
                  S(config.weight_decay) * p.array());
  }
}

struct EpochStats {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_acc = 0.0;
  double test_loss = 0.0;
  double test_acc = 0.0;
};

struct EvalStats {
  double loss = 0.0;
  double accuracy = 0.0;
  std::vector<Label> predictions;
};

// Eval-mode pass in batches; loss is the mean negative log-likelihood and
// argmax ties resolve to ham.
template <class S>
EvalStats evaluate(const ModelParams<S>& params,
                   const std::vector<TokenSeq>& seqs,
                   const std::vector<int>& labels, int eval_batch) {
  EvalStats stats;
  if (seqs.empty()) return stats;
  double loss_sum = 0.0;
  long correct = 0;
  for (std::size_t start = 0; start < seqs.size();
       start += static_cast<std::size_t>(eval_batch)) {
    const std::size_t count =
        std::min(static_cast<std::size_t>(eval_batch), seqs.size() - start);
    const Batch batch = Batch::from_seqs(
        std::span<const TokenSeq>(seqs.data() + start, count));
    const Eigen::MatrixXd probs = predict_proba(params, batch);
    for (std::size_t i = 0; i < count; ++i) {
      const int label = labels[start + i];
      const auto row = static_cast<Eigen::Index>(i);
      loss_sum += -std::log(std::max(probs(row, label), 1e-300));
      const Label predicted =
          probs(row, 1) > probs(row, 0) ? Label::spam : Label::ham;
      stats.predictions.push_back(predicted);
      if (static_cast<int>(predicted) == label) ++correct;
    }
  }
  stats.loss = loss_sum / double(seqs.size());
  stats.accuracy = double(correct) / double(seqs.size());
  return stats;
}

template <class S>
struct TrainResult {
  ModelParams<S> params;
  std::vector<EpochStats> log;
};

// Algorithm: per epoch, seeded shuffle of the training data, batches of
// train_batch, forward/backward/adamw_step with fresh gradients per batch;
// after each epoch an eval-mode pass over train and test records loss and
// accuracy. The test set never touches parameter updates.
template <class S>
TrainResult<S> train_loop(ModelParams<S> params,
                          const std::vector<TokenSeq>& train_seqs,
                          const std::vector<int>& train_labels,
                          const std::vector<TokenSeq>& test_seqs,
                          const std::vector<int>& test_labels,
                          const TrainConfig& config) {
  config.validate();
  if (train_seqs.empty()) throw DataError("train_loop: empty training set");
  if (train_seqs.size() != train_labels.size() ||
      test_seqs.size() != test_labels.size()) {
    throw DataError("train_loop: sequence/label count mismatch");
  }

  AdamWState<S> state = adamw_init(params);
  TrainResult<S> result;

  std::vector<std::size_t> order(train_seqs.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    Rng shuffle_rng(Rng::derive(config.seed, 0xE0000 + std::uint64_t(epoch)));
    Rng dropout_rng(Rng::derive(config.seed, 0xD0000 + std::uint64_t(epoch)));
    shuffle_rng.shuffle(order);

    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.train_batch)) {
      const std::size_t count = std::min(
          static_cast<std::size_t>(config.train_batch), order.size() - start);
      std::vector<TokenSeq> batch_seqs;
      std::vector<int> batch_labels;
      batch_seqs.reserve(count);
      batch_labels.reserve(count);
      for (std::size_t i = 0; i < count; ++i) {
        batch_seqs.push_back(train_seqs[order[start + i]]);
        batch_labels.push_back(train_labels[order[start + i]]);
      }
      const Batch batch = Batch::from_seqs(batch_seqs);
      auto fwd = forward(params, batch, /*train_mode=*/true, &dropout_rng);
      auto ce = cross_entropy(fwd.logits, batch_labels);
      auto bwd = backward(params, fwd.cache, ce.dlogits);
      adamw_step(params, bwd.grads, state, config);
    }

    const EvalStats train_eval =
        evaluate(params, train_seqs, train_labels, config.eval_batch);
    const EvalStats test_eval =
        evaluate(params, test_seqs, test_labels, config.eval_batch);
    result.log.push_back({epoch, train_eval.loss, train_eval.accuracy,
                          test_eval.loss, test_eval.accuracy});
  }

  result.params = std::move(params);
  return result;
}

}  // namespace spamlens
