#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

namespace mmpc {

struct BoxQpOptions {
  double tolerance = 1e-8;  ///< on ||x - clamp(x - grad)||_inf
  int max_iterations = 1000;
  std::optional<Eigen::VectorXd> warm_start;
  bool record_history = false;
};

struct BoxQpResult {
  Eigen::VectorXd x;
  double objective = 0.0;  ///< 0.5 x'Px + q'x
  double residual = 0.0;
  int iterations = 0;
  int active_bounds = 0;
  bool converged = false;
  bool closed_form = false;
  std::vector<double> history;  ///< objective after every iteration, when requested
};

/**
 * Minimizes 0.5 x'Px + q'x subject to lower <= x <= upper, P symmetric
 * positive definite.
 *
 * If the unconstrained minimizer already lies inside the box it is returned
 * directly. Otherwise the solver runs projected gradient iterations with a
 * Barzilai-Borwein step and an Armijo backtracking safeguard (objective never
 * increases), each followed by a Newton step on the currently free variables
 * that is kept only if it lowers the objective further. The start point is
 * the better of the clamped unconstrained minimizer and the warm start.
 *
 * Throws IllConditionedWeightsError if P is not positive definite.
 */
BoxQpResult solve_box_qp(const Eigen::MatrixXd& P, const Eigen::VectorXd& q,
                         const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                         const BoxQpOptions& options = {});

/// ||x - clamp(x - (Px + q))||_inf, zero exactly at a KKT point.
double projected_gradient_residual(const Eigen::MatrixXd& P, const Eigen::VectorXd& q,
                                   const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                   const Eigen::VectorXd& x);

}  // namespace mmpc
