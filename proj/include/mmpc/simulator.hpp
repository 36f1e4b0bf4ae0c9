#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mmpc/error_dynamics.hpp"
#include "mmpc/mpc.hpp"

namespace mmpc {

/// Zero-mean Gaussian noise added to f at every truth substep.
struct Disturbance {
  Eigen::VectorXd f_std;  ///< per-component standard deviation, empty for none
  std::uint64_t seed = 0;

  bool active() const { return f_std.size() > 0 && (f_std.array() > 0.0).any(); }
};

struct RolloutOptions {
  double duration = 1.0;        ///< s, must be a whole number of control steps
  int substeps = 1;             ///< truth integration steps per control step
  Eigen::VectorXd initial_offset;  ///< dx_init in the tangent space of the first reference; empty for zero
  Disturbance disturbance;
  double invariant_tolerance = 1e-9;
};

/// Column layout used for metrics and trace headers.
struct TraceLayout {
  std::vector<std::string> state_labels;   ///< ambient coordinates
  std::vector<std::string> error_labels;   ///< tangent coordinates
  std::vector<std::string> input_labels;
  int position_offset = 0;     ///< first of three ambient position coordinates, -1 for none
  int attitude_offset = -1;    ///< first tangent coordinate of the attitude error, -1 for none
  int attitude_dim = 0;

  static TraceLayout generic(const CanonicalSystem& sys);
};

struct TickRecord {
  double t = 0.0;
  Eigen::VectorXd state;
  Eigen::VectorXd reference;
  Eigen::VectorXd dx;
  Eigen::VectorXd u;
  Eigen::VectorXd u_d;
  int solver_iterations = 0;
  double solve_time_us = 0.0;
  int active_bounds = 0;
  bool converged = true;
};

struct SimTrace {
  std::string scenario;
  double dt = 0.0;
  TraceLayout layout;
  std::vector<TickRecord> ticks;
  bool failed = false;
  std::string failure;
  int nonconverged_ticks = 0;
};

/**
 * Closed-loop simulation. The truth state starts at refs[0] [+] dx_init and is
 * propagated with the canonical dynamics at dt / substeps, holding the MPC
 * input over each control step. References past the end of `refs` repeat the
 * last point. A lost track or a broken manifold invariant ends the trace early
 * with `failed` set.
 */
SimTrace rollout(const CanonicalSystem& sys, const MpcConfig& cfg,
                 std::span<const ReferencePoint> refs, const RolloutOptions& options,
                 const TraceLayout& layout);

struct Metrics {
  int ticks = 0;
  double rms_position_error = 0.0;   ///< m
  double max_position_error = 0.0;   ///< m
  double final_position_error = 0.0; ///< m
  double rms_attitude_error = 0.0;   ///< rad, geodesic
  double max_attitude_error = 0.0;   ///< rad
  double mean_solve_time_us = 0.0;
  double p99_solve_time_us = 0.0;
  double max_solve_time_us = 0.0;
  double constraint_activity = 0.0;  ///< fraction of ticks with an active input bound
  double mean_solver_iterations = 0.0;
  int nonconverged_ticks = 0;
};

double position_error(const SimTrace& trace, const TickRecord& tick);
double attitude_error(const SimTrace& trace, const TickRecord& tick);

/// Aggregates over ticks with t >= from_time.
Metrics compute_metrics(const SimTrace& trace, double from_time = 0.0);

}  // namespace mmpc
