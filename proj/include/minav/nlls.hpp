#pragma once

#include <functional>
#include <vector>

#include "minav/common.hpp"

namespace minav {

/// Evaluates stacked (already weighted) residuals at x. When `jacobian` is
/// non-null it must also be filled with d residual / d x.
using ResidualFunction =
    std::function<void(const VectorXd& x, VectorXd& residual, MatrixXd* jacobian)>;

struct SolverOptions {
  double initial_damping = 1e-3;
  double damping_increase = 10.0;
  double damping_decrease = 10.0;
  /// Stop when an accepted step lowers the cost by less than this fraction.
  double relative_cost_tolerance = 1e-12;
  /// Stop when the proposed step is shorter than this.
  double step_tolerance = 1e-12;
  int max_iterations = 200;
  /// A run only counts as converged if the final gradient infinity norm is
  /// below this times (1 + cost), in addition to stopping on a tolerance test.
  double gradient_tolerance = 1e-6;
  /// Damping beyond which a run that keeps rejecting steps gives up.
  double max_damping = 1e32;
};

struct NllsResult {
  VectorXd x;
  double cost{0.0};  // sum of squared residuals
  int iterations{0};
  bool converged{false};
  double gradient_norm{0.0};  // infinity norm of J^T r at x
  /// (J^T J)^{-1} at the solution; NaN-filled if J^T J is singular.
  MatrixXd covariance;
  /// Cost after the initial evaluation and after every accepted step.
  std::vector<double> cost_history;
};

/// Levenberg-Marquardt with Marquardt diagonal scaling. Damping starts at
/// initial_damping, grows on a rejected step and shrinks on an accepted one.
/// Accepted costs are non-increasing. Throws SingularNormalEquations when the
/// damped system cannot be solved and NonFiniteResidual on NaN/inf residuals
/// at the start point.
NllsResult solve_nlls(const ResidualFunction& fn, const VectorXd& initial,
                      const SolverOptions& options = {});

}  // namespace minav
