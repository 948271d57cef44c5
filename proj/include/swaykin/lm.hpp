#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

namespace swaykin {

struct LmConfig {
  int max_iterations = 100;
  double gradient_tolerance = 1e-10;
  double step_tolerance = 1e-12;
  double initial_lambda = 1e-3;
  double lambda_factor = 10.0;
};

struct LmResult {
  Eigen::VectorXd params;
  double sum_squares = 0.0;  // final ||r||^2
  int iterations = 0;        // accepted + rejected steps
  bool converged = false;
  int jacobian_rank = 0;
  Eigen::VectorXd covariance_diagonal;  // diag((J^T J)^-1), NaN where rank deficient
  std::vector<double> accepted_costs;   // ||r||^2 after the start and each accepted step
};

using ResidualFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Central-difference Jacobian with a per-parameter step.
Eigen::MatrixXd numeric_jacobian(const ResidualFunction& f, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& steps);

/// Levenberg-Marquardt with Marquardt diagonal scaling and a numeric Jacobian.
/// Throws NonFinite if the objective stops being finite.
LmResult levenberg_marquardt(const ResidualFunction& f, const Eigen::VectorXd& x0,
                             const Eigen::VectorXd& steps, const LmConfig& config = {});

}  // namespace swaykin
