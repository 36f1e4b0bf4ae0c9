#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace mmpc {

/// Below this angle the closed forms of Exp, Log and A() switch to Taylor expansions.
inline constexpr double kSmallAngle = 1e-7;

/// SO(3) Log rejects rotations whose angle is within this margin of pi.
inline constexpr double kCutLocusMargin = 1e-4;

Eigen::Matrix3d skew(const Eigen::Vector3d& v);
Eigen::Vector3d vee(const Eigen::Matrix3d& m);

Eigen::Matrix3d so3_exp(const Eigen::Vector3d& delta);

/// Rotation vector of R. Throws OutOfChartError when the angle is within
/// kCutLocusMargin of pi, where the axis is not recoverable.
Eigen::Vector3d so3_log(const Eigen::Matrix3d& R);

Eigen::Matrix2d so2_exp(double angle);
double so2_log(const Eigen::Matrix2d& R);

/**
 * Jacobian relating an additive change of a rotation vector to a tangent
 * perturbation on the left:
 *
 *   Exp(theta + d) ~= Exp(A(theta) d) Exp(theta),
 *   Log(Exp(-theta) Exp(theta + d)) ~= A(theta)^T d.
 *
 * A(theta) = I + (1 - cos t)/t^2 [theta] + (1 - sin t / t)/t^2 [theta]^2, t = |theta|.
 */
Eigen::Matrix3d a_matrix(const Eigen::Vector3d& theta);

}  // namespace mmpc
