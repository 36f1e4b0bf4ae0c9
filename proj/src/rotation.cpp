#include "mmpc/rotation.hpp"

#include <cmath>
#include <numbers>

#include "mmpc/errors.hpp"

namespace mmpc {

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Eigen::Vector3d vee(const Eigen::Matrix3d& m) {
  return {m(2, 1), m(0, 2), m(1, 0)};
}

Eigen::Matrix3d so3_exp(const Eigen::Vector3d& delta) {
  const double angle = delta.norm();
  const Eigen::Matrix3d K = skew(delta);
  if (angle < kSmallAngle) {
    return Eigen::Matrix3d::Identity() + K + 0.5 * K * K;
  }
  const double half = std::sin(0.5 * angle) / angle;
  return Eigen::Matrix3d::Identity() + (std::sin(angle) / angle) * K + (2.0 * half * half) * K * K;
}

Eigen::Vector3d so3_log(const Eigen::Matrix3d& R) {
  // w = sin(a) * axis; atan2 keeps the angle accurate near zero where acos does not.
  const Eigen::Vector3d w = 0.5 * vee(R - R.transpose());
  const double s = w.norm();
  const double c = 0.5 * (R.trace() - 1.0);
  const double angle = std::atan2(s, c);
  if (angle > std::numbers::pi - kCutLocusMargin) {
    throw OutOfChartError("so3_log: rotation angle too close to pi");
  }
  if (s < kSmallAngle) {
    return (1.0 + s * s / 6.0) * w;
  }
  return (angle / s) * w;
}

Eigen::Matrix2d so2_exp(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Eigen::Matrix2d R;
  R << c, -s, s, c;
  return R;
}

double so2_log(const Eigen::Matrix2d& R) { return std::atan2(R(1, 0), R(0, 0)); }

Eigen::Matrix3d a_matrix(const Eigen::Vector3d& theta) {
  const double t = theta.norm();
  const Eigen::Matrix3d K = skew(theta);
  if (t < kSmallAngle) {
    return Eigen::Matrix3d::Identity() + 0.5 * K + (1.0 / 6.0) * K * K;
  }
  const double t2 = t * t;
  const double half = std::sin(0.5 * t) / t;
  // (t - sin t) / t^3 by its series where the direct form cancels.
  const double c2 = t < 1e-3 ? 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0 : (t - std::sin(t)) / (t2 * t);
  return Eigen::Matrix3d::Identity() + (2.0 * half * half) * K + c2 * K * K;
}

}  // namespace mmpc
