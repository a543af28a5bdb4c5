#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "spamlens/bpe.hpp"
#include "spamlens/errors.hpp"
#include "spamlens/linalg.hpp"
#include "spamlens/rng.hpp"

namespace spamlens {

// Encoder classifier: token+position embeddings, post-layer-norm blocks
// (self-attention then feed-forward, residuals around each), first-token
// tanh pooler, linear classifier head.
struct ModelConfig {
  int n_layers = 2;
  int d_model = 64;
  int n_heads = 4;
  int d_ff = 128;
  int max_len = 64;
  int vocab_size = 0;
  double dropout_rate = 0.1;
  static constexpr int n_classes = 2;

  int head_dim() const { return d_model / n_heads; }

  void validate() const {
    if (n_layers < 1 || d_model < 1 || n_heads < 1 || d_ff < 1 ||
        max_len < 3 || vocab_size < 5) {
      throw UsageError("model config: sizes out of range");
    }
    if (d_model % n_heads != 0) {
      throw UsageError("model config: d_model must be divisible by n_heads");
    }
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
      throw UsageError("model config: dropout_rate must be in [0, 1)");
    }
  }
};

template <class S>
struct LayerParams {
  Mat<S> wq, wk, wv, wo;     // [d × d]
  RowVec<S> bq, bk, bv, bo;  // [1 × d]
  RowVec<S> ln1_gain, ln1_bias;
  Mat<S> w1;  // [d × d_ff]
  RowVec<S> b1;
  Mat<S> w2;  // [d_ff × d]
  RowVec<S> b2;
  RowVec<S> ln2_gain, ln2_bias;
};

template <class S>
struct ModelParams {
  ModelConfig config;
  Mat<S> tok_emb;  // [vocab × d]
  Mat<S> pos_emb;  // [max_len × d]
  std::vector<LayerParams<S>> layers;
  Mat<S> pooler_w;  // [d × d]
  RowVec<S> pooler_b;
  Mat<S> cls_w;  // [d × 2]
  RowVec<S> cls_b;
};

// Flattened named view over every trainable tensor, in a fixed traversal
// order shared by the optimizer, the checkpoint writer and the gradient
// check.
template <class S>
struct ParamView {
  std::string name;
  S* data;
  Eigen::Index rows;
  Eigen::Index cols;
  Eigen::Index size() const { return rows * cols; }
};

template <class S>
std::vector<ParamView<S>> param_views(ModelParams<S>& params) {
  std::vector<ParamView<S>> views;
  auto add = [&](const std::string& name, auto& tensor) {
    views.push_back({name, tensor.data(), tensor.rows(), tensor.cols()});
  };
  add("tok_emb", params.tok_emb);
  add("pos_emb", params.pos_emb);
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto& layer = params.layers[l];
    const std::string p = "layer" + std::to_string(l) + ".";
    add(p + "wq", layer.wq);
    add(p + "bq", layer.bq);
    add(p + "wk", layer.wk);
    add(p + "bk", layer.bk);
    add(p + "wv", layer.wv);
    add(p + "bv", layer.bv);
    add(p + "wo", layer.wo);
    add(p + "bo", layer.bo);
    add(p + "ln1_gain", layer.ln1_gain);
    add(p + "ln1_bias", layer.ln1_bias);
    add(p + "w1", layer.w1);
    add(p + "b1", layer.b1);
    add(p + "w2", layer.w2);
    add(p + "b2", layer.b2);
    add(p + "ln2_gain", layer.ln2_gain);
    add(p + "ln2_bias", layer.ln2_bias);
  }
  add("pooler_w", params.pooler_w);
  add("pooler_b", params.pooler_b);
  add("cls_w", params.cls_w);
  add("cls_b", params.cls_b);
  return views;
}

template <class S>
ModelParams<S> zero_like(const ModelParams<S>& params) {
  ModelParams<S> out;
  out.config = params.config;
  out.tok_emb = Mat<S>::Zero(params.tok_emb.rows(), params.tok_emb.cols());
  out.pos_emb = Mat<S>::Zero(params.pos_emb.rows(), params.pos_emb.cols());
  out.layers.resize(params.layers.size());
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& src = params.layers[l];
    auto& dst = out.layers[l];
    dst.wq = Mat<S>::Zero(src.wq.rows(), src.wq.cols());
    dst.wk = Mat<S>::Zero(src.wk.rows(), src.wk.cols());
    dst.wv = Mat<S>::Zero(src.wv.rows(), src.wv.cols());
    dst.wo = Mat<S>::Zero(src.wo.rows(), src.wo.cols());
    dst.bq = RowVec<S>::Zero(src.bq.cols());
    dst.bk = RowVec<S>::Zero(src.bk.cols());
    dst.bv = RowVec<S>::Zero(src.bv.cols());
    dst.bo = RowVec<S>::Zero(src.bo.cols());
    dst.ln1_gain = RowVec<S>::Zero(src.ln1_gain.cols());
    dst.ln1_bias = RowVec<S>::Zero(src.ln1_bias.cols());
    dst.w1 = Mat<S>::Zero(src.w1.rows(), src.w1.cols());
    dst.b1 = RowVec<S>::Zero(src.b1.cols());
    dst.w2 = Mat<S>::Zero(src.w2.rows(), src.w2.cols());
    dst.b2 = RowVec<S>::Zero(src.b2.cols());
    dst.ln2_gain = RowVec<S>::Zero(src.ln2_gain.cols());
    dst.ln2_bias = RowVec<S>::Zero(src.ln2_bias.cols());
  }
  out.pooler_w = Mat<S>::Zero(params.pooler_w.rows(), params.pooler_w.cols());
  out.pooler_b = RowVec<S>::Zero(params.pooler_b.cols());
  out.cls_w = Mat<S>::Zero(params.cls_w.rows(), params.cls_w.cols());
  out.cls_b = RowVec<S>::Zero(params.cls_b.cols());
  return out;
}

// Glorot-uniform projections, N(0, 0.02) embeddings, zero biases, unit
// layer-norm gains. Deterministic per seed.
template <class S>
ModelParams<S> init_params(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(Rng::derive(seed, 0x1217));

  auto glorot = [&](Eigen::Index rows, Eigen::Index cols) {
    const double bound =
        std::sqrt(6.0 / static_cast<double>(rows + cols));
    Mat<S> m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) {
        m(i, j) = static_cast<S>((2.0 * rng.uniform() - 1.0) * bound);
      }
    }
    return m;
  };
  auto gaussian = [&](Eigen::Index rows, Eigen::Index cols) {
    Mat<S> m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) {
        m(i, j) = static_cast<S>(rng.normal() * 0.02);
      }
    }
    return m;
  };

  ModelParams<S> p;
  p.config = config;
  const int d = config.d_model;
  p.tok_emb = gaussian(config.vocab_size, d);
  p.pos_emb = gaussian(config.max_len, d);
  p.layers.resize(static_cast<std::size_t>(config.n_layers));
  for (auto& layer : p.layers) {
    layer.wq = glorot(d, d);
    layer.wk = glorot(d, d);
    layer.wv = glorot(d, d);
    layer.wo = glorot(d, d);
    layer.bq = RowVec<S>::Zero(d);
    layer.bk = RowVec<S>::Zero(d);
    layer.bv = RowVec<S>::Zero(d);
    layer.bo = RowVec<S>::Zero(d);
    layer.ln1_gain = RowVec<S>::Ones(d);
    layer.ln1_bias = RowVec<S>::Zero(d);
    layer.w1 = glorot(d, config.d_ff);
    layer.b1 = RowVec<S>::Zero(config.d_ff);
    layer.w2 = glorot(config.d_ff, d);
    layer.b2 = RowVec<S>::Zero(d);
    layer.ln2_gain = RowVec<S>::Ones(d);
    layer.ln2_bias = RowVec<S>::Zero(d);
  }
  p.pooler_w = glorot(d, d);
  p.pooler_b = RowVec<S>::Zero(d);
  p.cls_w = glorot(d, ModelConfig::n_classes);
  p.cls_b = RowVec<S>::Zero(ModelConfig::n_classes);
  return p;
}

// A batch of encoded sequences. The mask is carried explicitly (not derived
// from the ids) so masked positions stay masked whatever token sits there.
struct Batch {
  Eigen::MatrixXi ids;   // [B × L]
  Eigen::MatrixXi mask;  // [B × L]

  Eigen::Index size() const { return ids.rows(); }
  Eigen::Index len() const { return ids.cols(); }

  static Batch from_seqs(std::span<const TokenSeq> seqs) {
    if (seqs.empty()) throw DataError("batch: no sequences");
    const auto len = seqs[0].ids.size();
    Batch batch;
    batch.ids.resize(static_cast<Eigen::Index>(seqs.size()), len);
    batch.mask.resize(static_cast<Eigen::Index>(seqs.size()), len);
    for (std::size_t b = 0; b < seqs.size(); ++b) {
      if (seqs[b].ids.size() != len) {
        throw DataError("batch: inconsistent sequence lengths");
      }
      batch.ids.row(static_cast<Eigen::Index>(b)) = seqs[b].ids.transpose();
      batch.mask.row(static_cast<Eigen::Index>(b)) = seqs[b].mask.transpose();
    }
    return batch;
  }

  // Shortest prefix containing every real position; columns past it are all
  // pad and contribute exactly zero, so the computation is cut there.
  Eigen::Index effective_len() const {
    Eigen::Index l = 1;
    for (Eigen::Index b = 0; b < mask.rows(); ++b) {
      for (Eigen::Index i = mask.cols(); i > l; --i) {
        if (mask(b, i - 1) != 0) {
          l = i;
          break;
        }
      }
    }
    return l;
  }
};

template <class S>
struct LayerCache {
  Mat<S> x_in;                      // [L × d]
  Mat<S> q, k, v;                   // [L × d]
  std::vector<Mat<S>> attn_probs;   // per head [L × L]
  Mat<S> ctx;                       // [L × d]
  Mat<S> attn_drop;                 // dropout scale factors, empty in eval
  Mat<S> ln1_xhat, ln1_out;
  Vec<S> ln1_inv_std;
  Mat<S> ff_pre, ff_act;            // [L × d_ff]
  Mat<S> ff_drop;
  Mat<S> ln2_xhat;
  Vec<S> ln2_inv_std;
};

template <class S>
struct ExampleCache {
  Mat<S> embeds_raw;  // forward input before embedding dropout
  Mat<S> emb_drop;
  std::vector<LayerCache<S>> layers;
  RowVec<S> h_cls;    // final hidden at the cls position
  RowVec<S> pooled;   // tanh output
};

template <class S>
struct ForwardCache {
  Batch batch;  // trimmed to the effective length
  bool train_mode = false;
  bool embeds_from_lookup = false;
  std::vector<ExampleCache<S>> examples;
};

template <class S>
struct ForwardResult {
  Mat<S> logits;  // [B × 2]
  ForwardCache<S> cache;
};

namespace detail {

template <class S>
Mat<S> dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate,
                    Rng& rng) {
  const S keep_scale = static_cast<S>(1.0 / (1.0 - rate));
  Mat<S> mask(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      mask(i, j) = rng.uniform() < rate ? S(0) : keep_scale;
    }
  }
  return mask;
}

}  // namespace detail

// Runs the encoder from explicit embedding matrices (one [L × d] matrix per
// example). This is the shared entry point for ordinary forward passes and
// for attribution paths that interpolate embeddings.
template <class S>
ForwardResult<S> forward_embedded(const ModelParams<S>& params,
                                  std::vector<Mat<S>> embeds,
                                  const Batch& batch, bool train_mode,
                                  Rng* dropout_rng) {
  const ModelConfig& cfg = params.config;
  const auto batch_size = batch.size();
  const auto len = batch.len();
  if (static_cast<Eigen::Index>(embeds.size()) != batch_size) {
    throw DataError("forward: embedding/batch size mismatch");
  }
  if (train_mode && cfg.dropout_rate > 0.0 && dropout_rng == nullptr) {
    throw UsageError("forward: train mode with dropout needs an rng");
  }
  const bool use_dropout = train_mode && cfg.dropout_rate > 0.0;
  const S scale = static_cast<S>(1.0 / std::sqrt(double(cfg.head_dim())));
  const S neg_inf = -std::numeric_limits<S>::infinity();

  ForwardResult<S> result;
  result.logits.resize(batch_size, ModelConfig::n_classes);
  result.cache.batch = batch;
  result.cache.train_mode = train_mode;
  result.cache.examples.resize(static_cast<std::size_t>(batch_size));

  for (Eigen::Index b = 0; b < batch_size; ++b) {
    auto& ex = result.cache.examples[static_cast<std::size_t>(b)];
    ex.embeds_raw = std::move(embeds[static_cast<std::size_t>(b)]);
    Mat<S> x = ex.embeds_raw;
    if (use_dropout) {
      ex.emb_drop = detail::dropout_mask<S>(len, cfg.d_model,
                                            cfg.dropout_rate, *dropout_rng);
      x = x.cwiseProduct(ex.emb_drop);
    }

    ex.layers.resize(static_cast<std::size_t>(cfg.n_layers));
    for (int l = 0; l < cfg.n_layers; ++l) {
      const auto& lp = params.layers[static_cast<std::size_t>(l)];
      auto& lc = ex.layers[static_cast<std::size_t>(l)];
      lc.x_in = x;

      lc.q = x * lp.wq;
      lc.q.rowwise() += lp.bq;
      lc.k = x * lp.wk;
      lc.k.rowwise() += lp.bk;
      lc.v = x * lp.wv;
      lc.v.rowwise() += lp.bv;

      lc.ctx.resize(len, cfg.d_model);
      lc.attn_probs.resize(static_cast<std::size_t>(cfg.n_heads));
      for (int h = 0; h < cfg.n_heads; ++h) {
        const auto off = static_cast<Eigen::Index>(h) * cfg.head_dim();
        const auto qh = lc.q.middleCols(off, cfg.head_dim());
        const auto kh = lc.k.middleCols(off, cfg.head_dim());
        const auto vh = lc.v.middleCols(off, cfg.head_dim());
        Mat<S> scores = qh * kh.transpose() * scale;
        for (Eigen::Index j = 0; j < len; ++j) {
          if (batch.mask(b, j) == 0) scores.col(j).setConstant(neg_inf);
        }
        Mat<S>& probs = lc.attn_probs[static_cast<std::size_t>(h)];
        probs = row_softmax(scores);
        lc.ctx.middleCols(off, cfg.head_dim()) = probs * vh;
      }

      Mat<S> attn = lc.ctx * lp.wo;
      attn.rowwise() += lp.bo;
      if (use_dropout) {
        lc.attn_drop = detail::dropout_mask<S>(len, cfg.d_model,
                                               cfg.dropout_rate, *dropout_rng);
        attn = attn.cwiseProduct(lc.attn_drop);
      }
      const Mat<S> sum1 = x + attn;
      lc.ln1_out = layer_norm(sum1, lp.ln1_gain, lp.ln1_bias, lc.ln1_xhat,
                              lc.ln1_inv_std);

      lc.ff_pre = lc.ln1_out * lp.w1;
      lc.ff_pre.rowwise() += lp.b1;
      lc.ff_act = gelu(lc.ff_pre);
      Mat<S> ff_out = lc.ff_act * lp.w2;
      ff_out.rowwise() += lp.b2;
      if (use_dropout) {
        lc.ff_drop = detail::dropout_mask<S>(len, cfg.d_model,
                                             cfg.dropout_rate, *dropout_rng);
        ff_out = ff_out.cwiseProduct(lc.ff_drop);
      }
      const Mat<S> sum2 = lc.ln1_out + ff_out;
      x = layer_norm(sum2, lp.ln2_gain, lp.ln2_bias, lc.ln2_xhat,
                     lc.ln2_inv_std);
    }

    ex.h_cls = x.row(0);
    RowVec<S> pre = ex.h_cls * params.pooler_w + params.pooler_b;
    ex.pooled = pre.array().tanh().matrix();
    result.logits.row(b) = ex.pooled * params.cls_w + params.cls_b;
  }
  return result;
}

template <class S>
std::vector<Mat<S>> lookup_embeddings(const ModelParams<S>& params,
                                      const Batch& batch) {
  const auto len = batch.len();
  std::vector<Mat<S>> embeds(static_cast<std::size_t>(batch.size()));
  for (Eigen::Index b = 0; b < batch.size(); ++b) {
    Mat<S> e(len, params.config.d_model);
    for (Eigen::Index i = 0; i < len; ++i) {
      const int id = batch.ids(b, i);
      if (id < 0 || id >= params.config.vocab_size) {
        throw DataError("forward: token id " + std::to_string(id) +
                        " out of range");
      }
      e.row(i) = params.tok_emb.row(id) + params.pos_emb.row(i);
    }
    embeds[static_cast<std::size_t>(b)] = std::move(e);
  }
  return embeds;
}

template <class S>
Batch trim_batch(const Batch& batch) {
  const auto len = batch.effective_len();
  Batch trimmed;
  trimmed.ids = batch.ids.leftCols(len);
  trimmed.mask = batch.mask.leftCols(len);
  return trimmed;
}

template <class S>
ForwardResult<S> forward(const ModelParams<S>& params, const Batch& batch,
                         bool train_mode = false, Rng* dropout_rng = nullptr) {
  params.config.validate();
  if (batch.len() > params.config.max_len) {
    throw DataError("forward: sequence longer than max_len");
  }
  const Batch trimmed = trim_batch<S>(batch);
  auto result = forward_embedded(params, lookup_embeddings(params, trimmed),
                                 trimmed, train_mode, dropout_rng);
  result.cache.embeds_from_lookup = true;
  return result;
}

template <class S>
struct BackwardResult {
  ModelParams<S> grads;
  std::vector<Mat<S>> d_embeds;  // gradient w.r.t. forward's raw embeddings
};

template <class S>
BackwardResult<S> backward(const ModelParams<S>& params,
                           const ForwardCache<S>& cache,
                           const Mat<S>& dlogits) {
  const ModelConfig& cfg = params.config;
  const Batch& batch = cache.batch;
  const auto len = batch.len();
  if (dlogits.rows() != batch.size() ||
      static_cast<std::size_t>(batch.size()) != cache.examples.size()) {
    throw DataError("backward: cache/grad shape mismatch");
  }
  const S scale = static_cast<S>(1.0 / std::sqrt(double(cfg.head_dim())));

  BackwardResult<S> result;
  result.grads = zero_like(params);
  result.d_embeds.resize(cache.examples.size());
  ModelParams<S>& g = result.grads;

  for (Eigen::Index b = 0; b < batch.size(); ++b) {
    const auto& ex = cache.examples[static_cast<std::size_t>(b)];
    const RowVec<S> dlogit = dlogits.row(b);

    // classifier head
    g.cls_w += ex.pooled.transpose() * dlogit;
    g.cls_b += dlogit;
    RowVec<S> dpooled = dlogit * params.cls_w.transpose();
    const RowVec<S> dpre =
        dpooled.cwiseProduct((RowVec<S>::Ones(cfg.d_model) -
                              ex.pooled.cwiseProduct(ex.pooled)));
    g.pooler_w += ex.h_cls.transpose() * dpre;
    g.pooler_b += dpre;

    Mat<S> dx = Mat<S>::Zero(len, cfg.d_model);
    dx.row(0) = dpre * params.pooler_w.transpose();

    for (int l = cfg.n_layers - 1; l >= 0; --l) {
      const auto& lp = params.layers[static_cast<std::size_t>(l)];
      const auto& lc = ex.layers[static_cast<std::size_t>(l)];
      auto& lg = g.layers[static_cast<std::size_t>(l)];

      // ln2
      Mat<S> dsum2 = layer_norm_backward(dx, lc.ln2_xhat, lc.ln2_inv_std,
                                         lp.ln2_gain, lg.ln2_gain,
                                         lg.ln2_bias);
      // feed-forward sublayer
      Mat<S> dff_out = dsum2;
      if (lc.ff_drop.size() > 0) dff_out = dff_out.cwiseProduct(lc.ff_drop);
      lg.w2 += lc.ff_act.transpose() * dff_out;
      lg.b2 += dff_out.colwise().sum();
      Mat<S> dff_act = dff_out * lp.w2.transpose();
      Mat<S> dff_pre = dff_act.cwiseProduct(gelu_grad(lc.ff_pre));
      lg.w1 += lc.ln1_out.transpose() * dff_pre;
      lg.b1 += dff_pre.colwise().sum();
      Mat<S> dln1_out = dsum2 + dff_pre * lp.w1.transpose();

      // ln1
      Mat<S> dsum1 = layer_norm_backward(dln1_out, lc.ln1_xhat,
                                         lc.ln1_inv_std, lp.ln1_gain,
                                         lg.ln1_gain, lg.ln1_bias);
      // attention sublayer
      Mat<S> dattn = dsum1;
      if (lc.attn_drop.size() > 0) dattn = dattn.cwiseProduct(lc.attn_drop);
      lg.wo += lc.ctx.transpose() * dattn;
      lg.bo += dattn.colwise().sum();
      Mat<S> dctx = dattn * lp.wo.transpose();

      Mat<S> dq(len, cfg.d_model), dk(len, cfg.d_model), dv(len, cfg.d_model);
      for (int h = 0; h < cfg.n_heads; ++h) {
        const auto off = static_cast<Eigen::Index>(h) * cfg.head_dim();
        const auto& probs = lc.attn_probs[static_cast<std::size_t>(h)];
        const auto kh = lc.k.middleCols(off, cfg.head_dim());
        const auto qh = lc.q.middleCols(off, cfg.head_dim());
        const auto vh = lc.v.middleCols(off, cfg.head_dim());
        const auto dctx_h = dctx.middleCols(off, cfg.head_dim());

        Mat<S> dprobs = dctx_h * vh.transpose();
        dv.middleCols(off, cfg.head_dim()) = probs.transpose() * dctx_h;
        // softmax backward; masked columns have probs == 0 so they stay 0
        Mat<S> dscores(len, len);
        for (Eigen::Index i = 0; i < len; ++i) {
          const S dot = dprobs.row(i).cwiseProduct(probs.row(i)).sum();
          dscores.row(i) = probs.row(i).cwiseProduct(
              (dprobs.row(i).array() - dot).matrix());
        }
        dq.middleCols(off, cfg.head_dim()) = dscores * kh * scale;
        dk.middleCols(off, cfg.head_dim()) =
            dscores.transpose() * qh * scale;
      }

      lg.wq += lc.x_in.transpose() * dq;
      lg.bq += dq.colwise().sum();
      lg.wk += lc.x_in.transpose() * dk;
      lg.bk += dk.colwise().sum();
      lg.wv += lc.x_in.transpose() * dv;
      lg.bv += dv.colwise().sum();

      Mat<S> dx_in = dsum1 + dq * lp.wq.transpose() + dk * lp.wk.transpose() +
                     dv * lp.wv.transpose();
      dx = std::move(dx_in);
    }

    if (ex.emb_drop.size() > 0) dx = dx.cwiseProduct(ex.emb_drop);
    if (cache.embeds_from_lookup) {
      for (Eigen::Index i = 0; i < len; ++i) {
        g.tok_emb.row(batch.ids(b, i)) += dx.row(i);
        g.pos_emb.row(i) += dx.row(i);
      }
    }
    result.d_embeds[static_cast<std::size_t>(b)] = std::move(dx);
  }
  return result;
}

// Row-wise softmax of eval-mode logits, accumulated in double.
template <class S>
Eigen::MatrixXd predict_proba(const ModelParams<S>& params,
                              const Batch& batch) {
  const auto logits = forward(params, batch).logits;
  Eigen::MatrixXd probs(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const Eigen::RowVectorXd row =
        logits.row(i).template cast<double>();
    const double m = row.maxCoeff();
    const Eigen::RowVectorXd e = (row.array() - m).exp().matrix();
    probs.row(i) = e / e.sum();
  }
  return probs;
}

}  // namespace spamlens
