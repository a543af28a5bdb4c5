#pragma once

#include <Eigen/Dense>

namespace spamlens {

struct RidgeFit {
  Eigen::VectorXd coef;
  double intercept = 0.0;
  Eigen::VectorXd std_error;  // per coefficient (intercept excluded)
};

// Minimizes sum_i w_i (y_i - b0 - x_i . beta)^2 + lambda ||beta||^2 with an
// unpenalized intercept. Standard errors come from the classical sandwich
// sigma^2 A^-1 (X'WX) A^-1 with A = X'WX + lambda I.
RidgeFit weighted_ridge(const Eigen::MatrixXd& features,
                        const Eigen::VectorXd& targets,
                        const Eigen::VectorXd& weights, double lambda);

}  // namespace spamlens
