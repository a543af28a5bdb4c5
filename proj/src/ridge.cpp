#include "spamlens/ridge.hpp"

#include <cmath>

#include "spamlens/errors.hpp"

namespace spamlens {

RidgeFit weighted_ridge(const Eigen::MatrixXd& features,
                        const Eigen::VectorXd& targets,
                        const Eigen::VectorXd& weights, double lambda) {
  const auto n = features.rows();
  const auto d = features.cols();
  if (targets.size() != n || weights.size() != n) {
    throw DataError("weighted_ridge: shape mismatch");
  }
  if (lambda < 0.0) throw UsageError("weighted_ridge: lambda must be >= 0");

  Eigen::MatrixXd design(n, d + 1);
  design.col(0).setOnes();
  design.rightCols(d) = features;

  const Eigen::MatrixXd weighted = weights.asDiagonal() * design;
  Eigen::MatrixXd normal = design.transpose() * weighted;  // X'WX
  Eigen::MatrixXd penalized = normal;
  for (Eigen::Index j = 1; j <= d; ++j) penalized(j, j) += lambda;

  const Eigen::VectorXd rhs = design.transpose() * (weights.asDiagonal() * targets);
  const Eigen::LDLT<Eigen::MatrixXd> solver(penalized);
  const Eigen::VectorXd beta = solver.solve(rhs);

  RidgeFit fit;
  fit.intercept = beta(0);
  fit.coef = beta.tail(d);

  const Eigen::VectorXd residuals = targets - design * beta;
  const double weight_sum = weights.sum();
  const double dof = std::max(1.0, weight_sum - double(d + 1));
  const double sigma2 =
      residuals.cwiseProduct(weights.cwiseSqrt()).squaredNorm() / dof;
  const Eigen::MatrixXd inv = solver.solve(
      Eigen::MatrixXd::Identity(d + 1, d + 1));
  const Eigen::MatrixXd cov = sigma2 * inv * normal * inv;
  fit.std_error.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    fit.std_error(j) = std::sqrt(std::max(0.0, cov(j + 1, j + 1)));
  }
  return fit;
}

}  // namespace spamlens
