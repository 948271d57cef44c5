#include "swaykin/lm.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "swaykin/error.hpp"

namespace swaykin {

Eigen::MatrixXd numeric_jacobian(const ResidualFunction& f, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& steps) {
  Eigen::MatrixXd jac;
  Eigen::VectorXd probe = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = steps[j];
    probe[j] = x[j] + h;
    const Eigen::VectorXd forward = f(probe);
    probe[j] = x[j] - h;
    const Eigen::VectorXd backward = f(probe);
    probe[j] = x[j];
    if (j == 0) jac.resize(forward.size(), x.size());
    jac.col(j) = (forward - backward) / (2.0 * h);
  }
  return jac;
}

namespace {

double checked_sum_squares(const Eigen::VectorXd& r) {
  const double ss = r.squaredNorm();
  if (!std::isfinite(ss)) throw Error(ErrorCode::NonFinite, "objective is not finite");
  return ss;
}

}  // namespace

LmResult levenberg_marquardt(const ResidualFunction& f, const Eigen::VectorXd& x0,
                             const Eigen::VectorXd& steps, const LmConfig& config) {
  LmResult result;
  Eigen::VectorXd x = x0;
  Eigen::VectorXd r = f(x);
  double cost = checked_sum_squares(r);
  result.accepted_costs.push_back(cost);

  double lambda = config.initial_lambda;
  Eigen::MatrixXd jac = numeric_jacobian(f, x, steps);
  bool need_jacobian = false;

  while (result.iterations < config.max_iterations) {
    if (need_jacobian) {
      jac = numeric_jacobian(f, x, steps);
      need_jacobian = false;
    }
    const Eigen::VectorXd gradient = jac.transpose() * r;
    if (gradient.norm() < config.gradient_tolerance) {
      result.converged = true;
      break;
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    Eigen::MatrixXd damped = jtj;
    for (Eigen::Index i = 0; i < damped.rows(); ++i) {
      damped(i, i) += lambda * std::max(jtj(i, i), 1e-12);
    }
    const Eigen::VectorXd delta = damped.ldlt().solve(-gradient);
    ++result.iterations;
    if (!delta.allFinite()) throw Error(ErrorCode::NonFinite, "LM step is not finite");
    if (delta.norm() < config.step_tolerance) {
      result.converged = true;
      break;
    }
    const Eigen::VectorXd candidate = x + delta;
    const Eigen::VectorXd r_candidate = f(candidate);
    const double candidate_cost = r_candidate.squaredNorm();
    if (std::isfinite(candidate_cost) && candidate_cost < cost) {
      x = candidate;
      r = r_candidate;
      cost = candidate_cost;
      result.accepted_costs.push_back(cost);
      lambda /= config.lambda_factor;
      need_jacobian = true;
    } else {
      lambda *= config.lambda_factor;
    }
  }

  if (need_jacobian) jac = numeric_jacobian(f, x, steps);
  result.params = x;
  result.sum_squares = cost;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
  const auto& sv = svd.singularValues();
  const double rank_tol = sv.size() > 0 ? sv[0] * 1e-10 : 0.0;
  result.jacobian_rank = static_cast<int>((sv.array() > rank_tol).count());
  const Eigen::MatrixXd jtj = jac.transpose() * jac;
  result.covariance_diagonal.resize(x.size());
  if (result.jacobian_rank == x.size()) {
    result.covariance_diagonal = jtj.inverse().diagonal();
  } else {
    result.covariance_diagonal.setConstant(std::numeric_limits<double>::quiet_NaN());
  }
  return result;
}

}  // namespace swaykin
