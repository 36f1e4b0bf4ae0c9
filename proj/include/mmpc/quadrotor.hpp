#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "mmpc/error_dynamics.hpp"

namespace mmpc {

/// Inertial frame is forward-right-down, so gravity is +z.
struct QuadrotorParams {
  double gravity = 9.81;  // m/s^2
};

struct QuadrotorState {
  Eigen::Vector3d p = Eigen::Vector3d::Zero();  // m
  Eigen::Vector3d v = Eigen::Vector3d::Zero();  // m/s
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();  // body to inertial
};

/// u = [a_T, wx, wy, wz]: thrust acceleration (m/s^2) and body rates (rad/s).
struct QuadrotorInput {
  double thrust = 0.0;
  Eigen::Vector3d rates = Eigen::Vector3d::Zero();

  Eigen::Vector4d vector() const { return {thrust, rates.x(), rates.y(), rates.z()}; }
};

/// R^3 x R^3 x SO(3)
Manifold quad_manifold();
ManifoldPoint quad_point(const QuadrotorState& s);
QuadrotorState quad_state(const ManifoldPoint& x);

/// f = [v; g e3 - a_T R e3; w], l = 9.
CanonicalSystem quad_system(const QuadrotorParams& params = {});

/**
 * Flat-output description of a flight: position over time plus an attitude
 * hint. With `BodyX` the hint is the desired heading and the body y axis is
 * z_b x hint; with `BodyY` the hint is the desired body y axis, which keeps
 * pitching maneuvers such as loops well defined.
 */
struct QuadTrajectory {
  enum class Hint { BodyX, BodyY };
  std::function<Eigen::Vector3d(double)> position;
  std::function<Eigen::Vector3d(double)> hint;
  Hint hint_kind = Hint::BodyX;
};

/// Speed rising smoothly (quintic smootherstep) from 0 to max_speed over ramp_time, then held.
struct SpeedProfile {
  double max_speed = 0.0;  // m/s
  double ramp_time = 0.0;  // s; 0 means constant max_speed from t = 0

  double speed(double t) const;
  /// Arc length travelled since t = 0.
  double distance(double t) const;
};

enum class YawPolicy { FixedZero, PathTangent };

QuadTrajectory hover_trajectory(const Eigen::Vector3d& position);
/// Horizontal circle starting at center + (radius, 0, 0), counter-clockwise seen from above.
QuadTrajectory circle_trajectory(double radius, const SpeedProfile& speed, YawPolicy yaw,
                                 const Eigen::Vector3d& center = Eigen::Vector3d::Zero());
/// Vertical loop in the x-z plane at constant speed, starting at the bottom.
QuadTrajectory loop_trajectory(double radius, double speed,
                               const Eigen::Vector3d& center = Eigen::Vector3d::Zero());

/**
 * Reference state and input at step k from the flat outputs sampled at
 * t_k..t_{k+3}. Velocity and acceleration are forward differences of the
 * sampled positions, so stepping one reference through the dynamics lands
 * on the next up to rounding. Body z follows the required thrust direction
 * g - a, a_T = |g - a|, and w = Log(R_k^T R_{k+1}) / dt.
 *
 * Throws InfeasibleReferenceError when |g - a| < 0.1 (free fall).
 */
ReferencePoint quad_reference(const QuadTrajectory& traj, const QuadrotorParams& params,
                              double dt, int k);
std::vector<ReferencePoint> quad_reference_sequence(const QuadTrajectory& traj,
                                                   const QuadrotorParams& params, double dt,
                                                   int count);

ReferencePoint quad_circle_reference(double radius, const SpeedProfile& speed, YawPolicy yaw,
                                     double dt, int k);

}  // namespace mmpc
