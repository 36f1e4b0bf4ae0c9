#include "mmpc/ugv.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mmpc/errors.hpp"
#include "mmpc/rotation.hpp"

namespace mmpc {

namespace {

Eigen::Matrix2d rot2_of(const ManifoldPoint& x) {
  return Eigen::Map<const Eigen::Matrix2d>(x.coords().data() + 3);
}

Eigen::Matrix2d hessian_of(const SurfaceModel& s) { return s.hessian(); }

Eigen::Vector3d lift(const SurfaceModel& s, const Eigen::Vector2d& xy) {
  return {xy.x(), xy.y(), s.height(xy)};
}

// Smallest s > s0 with |lift(path(s)) - lift(path(s0))| = chord.
double next_parameter(const Path2d& path, const SurfaceModel& surface, double s0, double chord) {
  const Eigen::Vector3d p0 = lift(surface, path.at(s0));
  auto dist = [&](double s) { return (lift(surface, path.at(s)) - p0).norm(); };
  double lo = s0;
  double hi = s0 + chord;
  for (int i = 0; dist(hi) < chord; ++i) {
    if (i > 60) throw InfeasibleReferenceError("ugv_reference: path does not advance");
    lo = hi;
    hi += chord;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++i) {
    const double mid = 0.5 * (lo + hi);
    (dist(mid) < chord ? lo : hi) = mid;
  }
  return hi;
}

}  // namespace

Manifold ugv_manifold(const SurfaceModel& surface) {
  return Manifold::product({Manifold::surface(surface), Manifold::rot2()});
}

ManifoldPoint ugv_point(const SurfaceModel& surface, const Eigen::Vector2d& xy, double heading) {
  const std::array<ManifoldPoint, 2> parts{surface_point(surface, xy), rot2_point(heading)};
  return ugv_manifold(surface).compose(parts);
}

double ugv_alpha(const SurfaceModel& surface, const Eigen::Vector2d& xy,
                 const Eigen::Matrix2d& R) {
  const double c = surface.gradient(xy).dot(R.col(0));
  return 1.0 / std::sqrt(1.0 + c * c);
}

double ugv_beta(const SurfaceModel& surface, const Eigen::Vector2d& xy) {
  return 1.0 / std::sqrt(1.0 + surface.gradient(xy).squaredNorm());
}

CanonicalSystem ugv_system(const SurfaceModel& surface) {
  CanonicalSystem sys;
  sys.name = "ugv";
  sys.manifold = ugv_manifold(surface);
  sys.input_dim = 2;
  sys.f = [surface](const ManifoldPoint& x, const Eigen::VectorXd& u) -> Eigen::VectorXd {
    const Eigen::Vector2d xy = x.coords().head<2>();
    const Eigen::Matrix2d R = rot2_of(x);
    Eigen::VectorXd out(3);
    out << ugv_alpha(surface, xy, R) * R.col(0) * u(0), ugv_beta(surface, xy) * u(1);
    return out;
  };
  sys.df_dx = [surface](const ManifoldPoint& x, const Eigen::VectorXd& u) -> Eigen::MatrixXd {
    const Eigen::Vector2d xy = x.coords().head<2>();
    const Eigen::Matrix2d R = rot2_of(x);
    const Eigen::Vector2d g = surface.gradient(xy);
    const Eigen::Matrix2d Hs = hessian_of(surface);
    const double c = g.dot(R.col(0));
    const double alpha = 1.0 / std::sqrt(1.0 + c * c);
    const double k_alpha = -c / std::pow(1.0 + c * c, 1.5);
    const Eigen::RowVector2d dalpha_dp = k_alpha * R.col(0).transpose() * Hs;
    const double dalpha_dR = k_alpha * g.dot(R.col(1));
    const Eigen::RowVector2d dbeta_dp = -g.transpose() * Hs / std::pow(1.0 + g.squaredNorm(), 1.5);

    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(3, 3);
    J.topLeftCorner<2, 2>() = R.col(0) * u(0) * dalpha_dp;
    J.block<2, 1>(0, 2) = R * (dalpha_dR * Eigen::Vector2d::UnitX() + alpha * Eigen::Vector2d::UnitY()) * u(0);
    J.block<1, 2>(2, 0) = dbeta_dp * u(1);
    return J;
  };
  sys.df_du = [surface](const ManifoldPoint& x, const Eigen::VectorXd&) -> Eigen::MatrixXd {
    const Eigen::Vector2d xy = x.coords().head<2>();
    const Eigen::Matrix2d R = rot2_of(x);
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(3, 2);
    J.block<2, 1>(0, 0) = ugv_alpha(surface, xy, R) * R.col(0);
    J(2, 1) = ugv_beta(surface, xy);
    return J;
  };
  return sys;
}

Path2d straight_path(const Eigen::Vector2d& origin, double heading) {
  const Eigen::Vector2d d(std::cos(heading), std::sin(heading));
  return {[=](double s) { return Eigen::Vector2d(origin + s * d); }};
}

Path2d circle_path(const Eigen::Vector2d& center, double radius, double start_angle) {
  if (!(radius > 0.0)) throw ContractViolation("circle_path: radius must be positive");
  return {[=](double s) {
    const double a = start_angle + s / radius;
    return Eigen::Vector2d(center + radius * Eigen::Vector2d(std::cos(a), std::sin(a)));
  }};
}

Path2d sine_path(const Eigen::Vector2d& origin, double heading, double amplitude,
                 double wavelength) {
  if (!(wavelength > 0.0)) throw ContractViolation("sine_path: wavelength must be positive");
  const Eigen::Vector2d d(std::cos(heading), std::sin(heading));
  const Eigen::Vector2d n(-d.y(), d.x());
  const double k = 2.0 * std::numbers::pi / wavelength;
  return {[=](double s) { return Eigen::Vector2d(origin + s * d + amplitude * std::sin(k * s) * n); }};
}

std::vector<ReferencePoint> ugv_reference(const Path2d& path, const SurfaceModel& surface,
                                          double v_d, double dt, int count,
                                          const UgvReferenceLimits& limits) {
  if (!(v_d > 0.0)) throw ContractViolation("ugv_reference: v_d must be positive");
  if (!(dt > 0.0)) throw ContractViolation("ugv_reference: dt must be positive");
  if (count < 1) throw ContractViolation("ugv_reference: count must be at least 1");

  const double chord = v_d * dt;
  const auto pts = static_cast<std::size_t>(count) + 2;
  std::vector<Eigen::Vector2d> xy;
  xy.reserve(pts);
  double s = 0.0;
  xy.push_back(path.at(s));
  while (xy.size() < pts) {
    s = next_parameter(path, surface, s, chord);
    xy.push_back(path.at(s));
  }

  std::vector<Eigen::Matrix2d> heading(pts - 1);
  for (std::size_t k = 0; k + 1 < pts; ++k) {
    const Eigen::Vector2d c = xy[k + 1] - xy[k];
    if (c.norm() < 1e-12) {
      throw InfeasibleReferenceError("ugv_reference: vertical chord, heading undefined");
    }
    heading[k] = so2_exp(std::atan2(c.y(), c.x()));
  }

  std::vector<ReferencePoint> out;
  out.reserve(static_cast<std::size_t>(count));
  for (std::size_t k = 0; k < static_cast<std::size_t>(count); ++k) {
    const Eigen::Matrix2d& R = heading[k];
    const double v = (xy[k + 1] - xy[k]).norm() / (dt * ugv_alpha(surface, xy[k], R));
    const double w = so2_log(R.transpose() * heading[k + 1]) / (dt * ugv_beta(surface, xy[k]));
    if (v > limits.v_max || std::abs(w) > limits.omega_max) {
      std::ostringstream msg;
      msg << "ugv_reference: step " << k << " needs v = " << v << " m/s, w = " << w
          << " rad/s, outside the input limits";
      throw InfeasibleReferenceError(msg.str());
    }
    const std::array<ManifoldPoint, 2> parts{surface_point(surface, xy[k]), rot2_point(R)};
    Eigen::VectorXd u(2);
    u << v, w;
    out.push_back({ugv_manifold(surface).compose(parts), u});
  }
  return out;
}

}  // namespace mmpc
