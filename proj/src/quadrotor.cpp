#include "mmpc/quadrotor.hpp"

#include <array>
#include <cmath>

#include "mmpc/errors.hpp"
#include "mmpc/rotation.hpp"

namespace mmpc {

namespace {

constexpr double kFreeFallThrust = 0.1;

Eigen::Matrix3d attitude_from(const Eigen::Vector3d& z_b, const Eigen::Vector3d& hint,
                              QuadTrajectory::Hint kind) {
  Eigen::Matrix3d R;
  if (kind == QuadTrajectory::Hint::BodyX) {
    Eigen::Vector3d y_b = z_b.cross(hint);
    if (y_b.norm() < 1e-6) {
      throw InfeasibleReferenceError("quad_reference: heading hint parallel to thrust axis");
    }
    y_b.normalize();
    R << y_b.cross(z_b), y_b, z_b;
  } else {
    Eigen::Vector3d x_b = hint.cross(z_b);
    if (x_b.norm() < 1e-6) {
      throw InfeasibleReferenceError("quad_reference: lateral hint parallel to thrust axis");
    }
    x_b.normalize();
    R << x_b, z_b.cross(x_b), z_b;
  }
  return R;
}

}  // namespace

Manifold quad_manifold() {
  static const Manifold m =
      Manifold::product({Manifold::euclidean(3), Manifold::euclidean(3), Manifold::rot3()});
  return m;
}

ManifoldPoint quad_point(const QuadrotorState& s) {
  const std::array<ManifoldPoint, 3> parts{euclidean_point(s.p), euclidean_point(s.v),
                                           rot3_point(s.R)};
  return quad_manifold().compose(parts);
}

QuadrotorState quad_state(const ManifoldPoint& x) {
  if (!(x.manifold() == quad_manifold())) {
    throw ContractViolation("quad_state: point is not on R3 x R3 x SO3");
  }
  QuadrotorState s;
  s.p = x.coords().segment<3>(0);
  s.v = x.coords().segment<3>(3);
  s.R = Eigen::Map<const Eigen::Matrix3d>(x.coords().data() + 6);
  return s;
}

CanonicalSystem quad_system(const QuadrotorParams& params) {
  const Eigen::Vector3d g(0.0, 0.0, params.gravity);
  const Eigen::Vector3d e3 = Eigen::Vector3d::UnitZ();
  const Eigen::Matrix3d e3_hat = skew(e3);

  CanonicalSystem sys;
  sys.name = "quadrotor";
  sys.manifold = quad_manifold();
  sys.input_dim = 4;
  sys.f = [g, e3](const ManifoldPoint& x, const Eigen::VectorXd& u) -> Eigen::VectorXd {
    const QuadrotorState s = quad_state(x);
    Eigen::VectorXd out(9);
    out << s.v, g - u(0) * s.R * e3, u.tail<3>();
    return out;
  };
  sys.df_dx = [e3_hat](const ManifoldPoint& x, const Eigen::VectorXd& u) -> Eigen::MatrixXd {
    const QuadrotorState s = quad_state(x);
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(9, 9);
    J.block<3, 3>(0, 3).setIdentity();
    J.block<3, 3>(3, 6) = u(0) * s.R * e3_hat;
    return J;
  };
  sys.df_du = [e3](const ManifoldPoint& x, const Eigen::VectorXd&) -> Eigen::MatrixXd {
    const QuadrotorState s = quad_state(x);
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(9, 4);
    J.block<3, 1>(3, 0) = -s.R * e3;
    J.block<3, 3>(6, 1).setIdentity();
    return J;
  };
  return sys;
}

double SpeedProfile::speed(double t) const {
  if (ramp_time <= 0.0 || t >= ramp_time) return max_speed;
  if (t <= 0.0) return 0.0;
  const double x = t / ramp_time;
  return max_speed * x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
}

double SpeedProfile::distance(double t) const {
  if (t <= 0.0) return ramp_time <= 0.0 ? max_speed * t : 0.0;
  if (ramp_time <= 0.0) return max_speed * t;
  if (t >= ramp_time) return max_speed * (0.5 * ramp_time + (t - ramp_time));
  const double x = t / ramp_time;
  // integral of the smootherstep: x^6 - 3 x^5 + 2.5 x^4
  return max_speed * ramp_time * x * x * x * x * (2.5 + x * (-3.0 + x));
}

QuadTrajectory hover_trajectory(const Eigen::Vector3d& position) {
  return {[position](double) { return position; },
          [](double) { return Eigen::Vector3d::UnitX().eval(); }, QuadTrajectory::Hint::BodyX};
}

QuadTrajectory circle_trajectory(double radius, const SpeedProfile& speed, YawPolicy yaw,
                                 const Eigen::Vector3d& center) {
  if (!(radius > 0.0)) throw ContractViolation("circle_trajectory: radius must be positive");
  QuadTrajectory traj;
  traj.position = [=](double t) {
    const double phi = speed.distance(t) / radius;
    return Eigen::Vector3d(center + radius * Eigen::Vector3d(std::cos(phi), std::sin(phi), 0.0));
  };
  if (yaw == YawPolicy::FixedZero) {
    traj.hint = [](double) { return Eigen::Vector3d::UnitX().eval(); };
  } else {
    traj.hint = [=](double t) {
      const double phi = speed.distance(t) / radius;
      return Eigen::Vector3d(-std::sin(phi), std::cos(phi), 0.0);
    };
  }
  traj.hint_kind = QuadTrajectory::Hint::BodyX;
  return traj;
}

QuadTrajectory loop_trajectory(double radius, double speed, const Eigen::Vector3d& center) {
  if (!(radius > 0.0)) throw ContractViolation("loop_trajectory: radius must be positive");
  QuadTrajectory traj;
  // z is down: the bottom of the loop is center + (0, 0, radius).
  traj.position = [=](double t) {
    const double phi = speed * t / radius;
    return Eigen::Vector3d(center + radius * Eigen::Vector3d(std::sin(phi), 0.0, std::cos(phi)));
  };
  traj.hint = [](double) { return Eigen::Vector3d::UnitY().eval(); };
  traj.hint_kind = QuadTrajectory::Hint::BodyY;
  return traj;
}

ReferencePoint quad_reference(const QuadTrajectory& traj, const QuadrotorParams& params,
                              double dt, int k) {
  if (!(dt > 0.0)) throw ContractViolation("quad_reference: dt must be positive");
  const Eigen::Vector3d g(0.0, 0.0, params.gravity);
  std::array<Eigen::Vector3d, 4> p;
  for (int i = 0; i < 4; ++i) p[static_cast<std::size_t>(i)] = traj.position((k + i) * dt);

  auto thrust_vector = [&](int i) -> Eigen::Vector3d {
    const auto j = static_cast<std::size_t>(i);
    const Eigen::Vector3d acc = (p[j + 2] - 2.0 * p[j + 1] + p[j]) / (dt * dt);
    const Eigen::Vector3d t = g - acc;
    if (t.norm() < kFreeFallThrust) {
      throw InfeasibleReferenceError("quad_reference: free-fall singularity, |g - a| < 0.1");
    }
    return t;
  };

  const Eigen::Vector3d t0 = thrust_vector(0);
  const Eigen::Vector3d t1 = thrust_vector(1);
  const Eigen::Matrix3d R0 = attitude_from(t0.normalized(), traj.hint(k * dt), traj.hint_kind);
  const Eigen::Matrix3d R1 =
      attitude_from(t1.normalized(), traj.hint((k + 1) * dt), traj.hint_kind);

  QuadrotorState s;
  s.p = p[0];
  s.v = (p[1] - p[0]) / dt;
  s.R = R0;
  Eigen::VectorXd u(4);
  u << t0.norm(), so3_log(R0.transpose() * R1) / dt;
  return {quad_point(s), u};
}

std::vector<ReferencePoint> quad_reference_sequence(const QuadTrajectory& traj,
                                                   const QuadrotorParams& params, double dt,
                                                   int count) {
  std::vector<ReferencePoint> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) out.push_back(quad_reference(traj, params, dt, k));
  return out;
}

ReferencePoint quad_circle_reference(double radius, const SpeedProfile& speed, YawPolicy yaw,
                                     double dt, int k) {
  return quad_reference(circle_trajectory(radius, speed, yaw), QuadrotorParams{}, dt, k);
}

}  // namespace mmpc
