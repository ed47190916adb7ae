#include "minav/nlls.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace minav {

namespace {

MatrixXd information_inverse(const MatrixXd& hessian) {
  const MatrixXd nan = MatrixXd::Constant(hessian.rows(), hessian.cols(),
                                          std::numeric_limits<double>::quiet_NaN());
  const VectorXd eig = Eigen::SelfAdjointEigenSolver<MatrixXd>(hessian, Eigen::EigenvaluesOnly)
                           .eigenvalues();
  if (eig.size() == 0 || !(eig(0) > 1e-12 * eig(eig.size() - 1))) return nan;
  Eigen::LLT<MatrixXd> llt(hessian);
  if (llt.info() != Eigen::Success) return nan;
  return llt.solve(MatrixXd::Identity(hessian.rows(), hessian.cols()));
}

}  // namespace

NllsResult solve_nlls(const ResidualFunction& fn, const VectorXd& initial,
                      const SolverOptions& options) {
  NllsResult result;
  VectorXd x = initial;
  VectorXd residual;
  MatrixXd jac;
  fn(x, residual, &jac);
  if (!residual.allFinite() || !jac.allFinite()) {
    throw Error(ErrorCode::NonFiniteResidual, "residual or Jacobian not finite at start point");
  }
  double cost = residual.squaredNorm();
  result.cost_history.push_back(cost);

  bool tolerance_stop = cost == 0.0;
  double damping = options.initial_damping;
  VectorXd trial_residual;
  int iterations = 0;

  while (!tolerance_stop && iterations < options.max_iterations) {
    const MatrixXd hessian = jac.transpose() * jac;
    const VectorXd gradient = jac.transpose() * residual;
    VectorXd scale = hessian.diagonal();
    const double floor = 1e-12 * std::max(scale.maxCoeff(), std::numeric_limits<double>::min());
    scale = scale.cwiseMax(floor);

    ++iterations;
    MatrixXd damped = hessian;
    damped.diagonal() += damping * scale;
    Eigen::LLT<MatrixXd> llt(damped);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorCode::SingularNormalEquations, "damped normal equations not solvable");
    }
    const VectorXd step = -llt.solve(gradient);
    if (!step.allFinite()) {
      throw Error(ErrorCode::SingularNormalEquations, "non-finite step");
    }
    if (step.norm() < options.step_tolerance) {
      tolerance_stop = true;
      break;
    }

    const VectorXd candidate = x + step;
    fn(candidate, trial_residual, nullptr);
    const double trial_cost =
        trial_residual.allFinite() ? trial_residual.squaredNorm() : std::numeric_limits<double>::infinity();

    if (trial_cost < cost) {
      const double decrease = (cost - trial_cost) / cost;
      x = candidate;
      fn(x, residual, &jac);
      cost = residual.squaredNorm();
      result.cost_history.push_back(cost);
      damping /= options.damping_decrease;
      if (decrease < options.relative_cost_tolerance || cost == 0.0) tolerance_stop = true;
    } else {
      damping *= options.damping_increase;
      // No descent direction left at working precision.
      if (damping > options.max_damping) tolerance_stop = true;
    }
  }

  const VectorXd gradient = jac.transpose() * residual;
  result.x = x;
  result.cost = cost;
  result.iterations = iterations;
  result.gradient_norm = gradient.size() ? gradient.cwiseAbs().maxCoeff() : 0.0;
  result.converged = tolerance_stop && result.gradient_norm <= options.gradient_tolerance * (1.0 + cost);
  result.covariance = information_inverse(jac.transpose() * jac);
  return result;
}

}  // namespace minav
