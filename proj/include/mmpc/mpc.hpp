#pragma once

#include <Eigen/Core>
#include <optional>
#include <span>
#include <vector>

#include "mmpc/box_qp.hpp"
#include "mmpc/error_dynamics.hpp"

namespace mmpc {

/**
 * Horizon, weights and input limits of the tracking MPC.
 *
 * Stage weights are indexed by time step. `state_weights` holds either one
 * matrix shared by every step or N matrices Q_0..Q_{N-1}; Q_0 never enters
 * the cost because dx_0 is fixed. `input_weights` holds one shared matrix or
 * R_0..R_{N-1}. The terminal weight defaults to Q_{N-1}.
 */
struct MpcConfig {
  int horizon = 1;
  double dt = 0.01;
  std::vector<Eigen::MatrixXd> state_weights;
  std::optional<Eigen::MatrixXd> terminal_weight;
  std::vector<Eigen::MatrixXd> input_weights;
  Eigen::VectorXd u_min;
  Eigen::VectorXd u_max;
  double tolerance = 1e-8;
  int max_iterations = 1000;

  /// Throws ConfigError describing the first violated requirement.
  void validate(int state_dim, int input_dim) const;

  const Eigen::MatrixXd& state_weight(int k) const;
  const Eigen::MatrixXd& terminal() const;
  const Eigen::MatrixXd& input_weight(int k) const;
};

/// Condensed prediction dX = M dU + H dx0 with the block weights and bounds.
struct CondensedQp {
  int horizon = 0;
  int state_dim = 0;
  int input_dim = 0;
  Eigen::MatrixXd M;     ///< (N n) x (N m), block lower triangular
  Eigen::MatrixXd H;     ///< (N n) x n
  Eigen::MatrixXd Qbar;  ///< diag(Q_1, ..., Q_{N-1}, P_N)
  Eigen::MatrixXd Rbar;  ///< diag(R_0, ..., R_{N-1})
  Eigen::VectorXd lower; ///< u_min - u_d, stacked
  Eigen::VectorXd upper; ///< u_max - u_d, stacked

  /// M' Qbar M + Rbar
  Eigen::MatrixXd hessian() const;
  /// M' Qbar H dx0
  Eigen::VectorXd linear_term(const Eigen::VectorXd& dx0) const;
  /// Sum of weighted squared errors over the horizon, excluding the fixed dx0 term.
  double cost(const Eigen::VectorXd& dU, const Eigen::VectorXd& dx0) const;
  Eigen::VectorXd predict(const Eigen::VectorXd& dU, const Eigen::VectorXd& dx0) const;
};

struct MpcSolution {
  Eigen::VectorXd delta_u;       ///< optimal dU, length N m
  Eigen::VectorXd u0;            ///< first input, u_d0 + du0 clamped to [u_min, u_max]
  Eigen::VectorXd predicted_dx;  ///< dX = M dU + H dx0
  double objective = 0.0;
  double residual = 0.0;
  int iterations = 0;
  int active_bounds = 0;
  bool converged = true;
  bool closed_form = false;
};

CondensedQp build_condensed(std::span<const LinearizedErrorDynamics> dynamics,
                            const MpcConfig& cfg);

/// -(M'QM + R)^-1 M'QH dx0, ignoring the input bounds.
Eigen::VectorXd solve_unconstrained(const CondensedQp& qp, const Eigen::VectorXd& dx0);

MpcSolution solve_box_qp(const CondensedQp& qp, const Eigen::VectorXd& dx0,
                         const std::optional<Eigen::VectorXd>& warm_start = std::nullopt,
                         double tolerance = 1e-8, int max_iterations = 1000);

/**
 * One pass of the tracking loop: error state against window[0], linearization
 * along the window, condensed QP, first input. Throws TrackingLostError when
 * the current state is outside the chart of the first reference point.
 */
MpcSolution mpc_step(const CanonicalSystem& sys, const MpcConfig& cfg, const ManifoldPoint& x_now,
                     std::span<const ReferencePoint> window,
                     const std::optional<Eigen::VectorXd>& warm_start = std::nullopt);

/// Stateful controller that warm-starts each solve from the previous input
/// sequence shifted by one step. Single owner; not for concurrent use.
class MpcController {
 public:
  MpcController(CanonicalSystem sys, MpcConfig cfg);

  MpcSolution step(const ManifoldPoint& x_now, std::span<const ReferencePoint> window);
  void reset() { previous_inputs_.reset(); }

  const CanonicalSystem& system() const { return sys_; }
  const MpcConfig& config() const { return cfg_; }

 private:
  CanonicalSystem sys_;
  MpcConfig cfg_;
  std::optional<Eigen::VectorXd> previous_inputs_;  // absolute inputs, length N m
};

}  // namespace mmpc
