#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <utility>

#include "mmpc/manifold.hpp"

namespace mmpc {

/**
 * Discrete-time system in canonical form x_{k+1} = x_k (+) dt * f(x_k, u_k).
 *
 * The system-specific parts are f and its two Jacobians, taken with respect to
 * a boxplus perturbation of the state and an additive perturbation of the input:
 *   df_dx(x, u) = d f(x [+] d, u) / dd at 0,   l x n
 *   df_du(x, u) = d f(x, u + d) / dd at 0,     l x m
 * All three must be pure so the system can be shared across threads.
 */
struct CanonicalSystem {
  using VectorFn = std::function<Eigen::VectorXd(const ManifoldPoint&, const Eigen::VectorXd&)>;
  using MatrixFn = std::function<Eigen::MatrixXd(const ManifoldPoint&, const Eigen::VectorXd&)>;

  std::string name;
  Manifold manifold = Manifold::euclidean(1);
  int input_dim = 0;
  VectorFn f;
  MatrixFn df_dx;
  MatrixFn df_du;

  /// f with its output length checked against the manifold's exogenous dimension.
  Eigen::VectorXd perturbation(const ManifoldPoint& x, const Eigen::VectorXd& u) const;
};

struct ReferencePoint {
  ManifoldPoint x;
  Eigen::VectorXd u;
};

/// Linearized error system dx_{k+1} ~= Fx dx_k + Fu du_k around one reference point.
struct LinearizedErrorDynamics {
  Eigen::MatrixXd Fx;
  Eigen::MatrixXd Fu;
  ReferencePoint ref;
  double dt = 0.0;
};

ManifoldPoint step(const CanonicalSystem& sys, const ManifoldPoint& x, const Eigen::VectorXd& u,
                   double dt);

/// x [-] x_d
Eigen::VectorXd error_state(const Manifold& m, const ManifoldPoint& x, const ManifoldPoint& x_d);

/// Fx = Gx + dt Gf df_dx, Fu = dt Gf df_du with G blocks evaluated at v = dt f(x_d, u_d).
LinearizedErrorDynamics linearize(const CanonicalSystem& sys, const ReferencePoint& ref,
                                  double dt);

/**
 * Central finite differences of the exact one-step error map
 *   (dx, du) -> ((x_d [+] dx) (+) dt f(x_d [+] dx, u_d + du)) [-] (x_d (+) dt f(x_d, u_d)).
 * Test oracle for linearize(); shipped controllers never call it. If a probe
 * leaves the chart, the step is reduced tenfold once before giving up.
 */
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> fd_error_jacobians(const CanonicalSystem& sys,
                                                               const ReferencePoint& ref,
                                                               double dt, double h = 1e-6);

}  // namespace mmpc
