#include "spamlens/intgrad.hpp"

namespace spamlens {

IgPathResult integrate_embedding_path(const EmbeddingFn& fn,
                                      const Eigen::MatrixXd& baseline,
                                      const Eigen::MatrixXd& input,
                                      int steps) {
  if (steps < 1) throw UsageError("integrate_embedding_path: steps >= 1");
  if (baseline.rows() != input.rows() || baseline.cols() != input.cols()) {
    throw DataError("integrate_embedding_path: shape mismatch");
  }
  const Eigen::MatrixXd delta = input - baseline;
  Eigen::MatrixXd grad_sum = Eigen::MatrixXd::Zero(input.rows(), input.cols());

  IgPathResult result;
  for (int k = 0; k < steps; ++k) {
    const double alpha = double(k) / double(steps);
    const auto [value, grad] = fn(baseline + alpha * delta);
    if (k == 0) result.f_baseline = value;
    grad_sum += grad;
  }
  result.f_input = fn(input).first;

  const Eigen::MatrixXd mean_grad = grad_sum / double(steps);
  result.token_attributions =
      delta.cwiseProduct(mean_grad).rowwise().sum();
  result.raw_sum = result.token_attributions.sum();
  return result;
}

}  // namespace spamlens
