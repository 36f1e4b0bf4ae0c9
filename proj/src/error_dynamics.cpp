#include "mmpc/error_dynamics.hpp"

#include <sstream>

#include "mmpc/errors.hpp"

namespace mmpc {

Eigen::VectorXd CanonicalSystem::perturbation(const ManifoldPoint& x,
                                              const Eigen::VectorXd& u) const {
  if (u.size() != input_dim) {
    std::ostringstream msg;
    msg << name << ": input has length " << u.size() << ", expected " << input_dim;
    throw ContractViolation(msg.str());
  }
  Eigen::VectorXd out = f(x, u);
  if (out.size() != manifold.exogenous_dim()) {
    throw ContractViolation(name + ": f returned a vector of the wrong length");
  }
  return out;
}

ManifoldPoint step(const CanonicalSystem& sys, const ManifoldPoint& x, const Eigen::VectorXd& u,
                   double dt) {
  if (!(dt > 0.0)) throw ContractViolation("step: dt must be positive");
  if (!u.allFinite()) throw ContractViolation("step: non-finite input");
  return sys.manifold.oplus(x, dt * sys.perturbation(x, u));
}

Eigen::VectorXd error_state(const Manifold& m, const ManifoldPoint& x, const ManifoldPoint& x_d) {
  return m.boxminus(x, x_d);
}

LinearizedErrorDynamics linearize(const CanonicalSystem& sys, const ReferencePoint& ref,
                                  double dt) {
  const Eigen::VectorXd v = dt * sys.perturbation(ref.x, ref.u);
  const Eigen::MatrixXd Gx = sys.manifold.gx(ref.x, v);
  const Eigen::MatrixXd Gf = sys.manifold.gf(ref.x, v);
  const Eigen::MatrixXd dfx = sys.df_dx(ref.x, ref.u);
  const Eigen::MatrixXd dfu = sys.df_du(ref.x, ref.u);
  const int n = sys.manifold.tangent_dim();
  const int l = sys.manifold.exogenous_dim();
  if (dfx.rows() != l || dfx.cols() != n || dfu.rows() != l || dfu.cols() != sys.input_dim) {
    throw ContractViolation(sys.name + ": Jacobian shapes do not match (n, l, m)");
  }
  LinearizedErrorDynamics out{Gx + dt * Gf * dfx, dt * Gf * dfu, ref, dt};
  return out;
}

namespace {

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> central_differences(const CanonicalSystem& sys,
                                                                const ReferencePoint& ref,
                                                                double dt, double h) {
  const Manifold& m = sys.manifold;
  const int n = m.tangent_dim();
  const int mu = sys.input_dim;
  const ManifoldPoint nominal = step(sys, ref.x, ref.u, dt);

  auto propagate = [&](const Eigen::VectorXd& dx, const Eigen::VectorXd& du) {
    const ManifoldPoint xp = m.boxplus(ref.x, dx);
    return m.boxminus(step(sys, xp, ref.u + du, dt), nominal);
  };

  Eigen::MatrixXd Fx(n, n), Fu(n, mu);
  Eigen::VectorXd zx = Eigen::VectorXd::Zero(n), zu = Eigen::VectorXd::Zero(mu);
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd e = zx;
    e(j) = h;
    Fx.col(j) = (propagate(e, zu) - propagate(-e, zu)) / (2.0 * h);
  }
  for (int j = 0; j < mu; ++j) {
    Eigen::VectorXd e = zu;
    e(j) = h;
    Fu.col(j) = (propagate(zx, e) - propagate(zx, -e)) / (2.0 * h);
  }
  return {Fx, Fu};
}

}  // namespace

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> fd_error_jacobians(const CanonicalSystem& sys,
                                                               const ReferencePoint& ref,
                                                               double dt, double h) {
  if (!(h >= 1e-8 && h <= 1e-4)) throw ContractViolation("fd_error_jacobians: h out of range");
  try {
    return central_differences(sys, ref, dt, h);
  } catch (const OutOfChartError&) {
    return central_differences(sys, ref, dt, h / 10.0);
  }
}

}  // namespace mmpc
