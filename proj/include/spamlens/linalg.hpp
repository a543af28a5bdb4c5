#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace spamlens {

template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

template <class S>
using RowVec = Eigen::Matrix<S, 1, Eigen::Dynamic>;

// Row-wise softmax, stabilized by max subtraction. -inf scores produce
// exact zeros, which is what the attention mask relies on.
template <class S>
Mat<S> row_softmax(const Mat<S>& scores) {
  Mat<S> out(scores.rows(), scores.cols());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const S m = scores.row(i).maxCoeff();
    RowVec<S> e = (scores.row(i).array() - m).exp().matrix();
    out.row(i) = e / e.sum();
  }
  return out;
}

template <class S>
S gelu_scalar(S x) {
  return x * S(0.5) * (S(1) + std::erf(x * S(M_SQRT1_2)));
}

template <class S>
S gelu_grad_scalar(S x) {
  const S cdf = S(0.5) * (S(1) + std::erf(x * S(M_SQRT1_2)));
  const S pdf = std::exp(S(-0.5) * x * x) * S(0.3989422804014327);
  return cdf + x * pdf;
}

template <class S>
Mat<S> gelu(const Mat<S>& x) {
  return x.unaryExpr([](S v) { return gelu_scalar(v); });
}

template <class S>
Mat<S> gelu_grad(const Mat<S>& x) {
  return x.unaryExpr([](S v) { return gelu_grad_scalar(v); });
}

inline constexpr double kLayerNormEps = 1e-5;

// y = gain .* (x - mean) / sqrt(var + eps) + bias, row-wise.
// xhat and inv_std are produced for the backward pass.
template <class S>
Mat<S> layer_norm(const Mat<S>& x, const RowVec<S>& gain,
                  const RowVec<S>& bias, Mat<S>& xhat, Vec<S>& inv_std) {
  const auto d = x.cols();
  xhat.resize(x.rows(), d);
  inv_std.resize(x.rows());
  Mat<S> out(x.rows(), d);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const S mean = x.row(i).mean();
    const S var = (x.row(i).array() - mean).square().sum() / S(d);
    const S istd = S(1) / std::sqrt(var + S(kLayerNormEps));
    inv_std(i) = istd;
    xhat.row(i) = ((x.row(i).array() - mean) * istd).matrix();
    out.row(i) = xhat.row(i).cwiseProduct(gain) + bias;
  }
  return out;
}

// Backward through layer_norm; accumulates gain/bias gradients.
template <class S>
Mat<S> layer_norm_backward(const Mat<S>& dy, const Mat<S>& xhat,
                           const Vec<S>& inv_std, const RowVec<S>& gain,
                           RowVec<S>& dgain, RowVec<S>& dbias) {
  const auto d = xhat.cols();
  Mat<S> dx(xhat.rows(), d);
  for (Eigen::Index i = 0; i < xhat.rows(); ++i) {
    const RowVec<S> dxhat = dy.row(i).cwiseProduct(gain);
    const S sum_dxhat = dxhat.sum();
    const S sum_dxhat_xhat = dxhat.cwiseProduct(xhat.row(i)).sum();
    dx.row(i) = (inv_std(i) / S(d)) *
                (S(d) * dxhat.array() - sum_dxhat -
                 xhat.row(i).array() * sum_dxhat_xhat)
                    .matrix();
    dgain += dy.row(i).cwiseProduct(xhat.row(i));
    dbias += dy.row(i);
  }
  return dx;
}

}  // namespace spamlens
