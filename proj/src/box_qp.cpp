#include "mmpc/box_qp.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>

#include "mmpc/errors.hpp"

namespace mmpc {

namespace {

Eigen::VectorXd clamp(const Eigen::VectorXd& x, const Eigen::VectorXd& lo,
                      const Eigen::VectorXd& hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

double objective(const Eigen::MatrixXd& P, const Eigen::VectorXd& q, const Eigen::VectorXd& x) {
  return 0.5 * x.dot(P * x) + q.dot(x);
}

int count_active(const Eigen::VectorXd& x, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  int n = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x(i) <= lo(i) || x(i) >= hi(i)) ++n;
  }
  return n;
}

}  // namespace

double projected_gradient_residual(const Eigen::MatrixXd& P, const Eigen::VectorXd& q,
                                   const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                   const Eigen::VectorXd& x) {
  const Eigen::VectorXd g = P * x + q;
  return (x - clamp(x - g, lower, upper)).cwiseAbs().maxCoeff();
}

BoxQpResult solve_box_qp(const Eigen::MatrixXd& P, const Eigen::VectorXd& q,
                         const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                         const BoxQpOptions& options) {
  const Eigen::Index n = q.size();
  if (P.rows() != n || P.cols() != n || lower.size() != n || upper.size() != n) {
    throw ContractViolation("solve_box_qp: inconsistent problem dimensions");
  }
  if ((lower.array() > upper.array()).any()) {
    throw ContractViolation("solve_box_qp: lower bound exceeds upper bound");
  }

  Eigen::LLT<Eigen::MatrixXd> llt(P);
  if (llt.info() != Eigen::Success) {
    throw IllConditionedWeightsError("solve_box_qp: Hessian is not positive definite");
  }

  BoxQpResult res;
  const Eigen::VectorXd unconstrained = llt.solve(-q);
  if ((unconstrained.array() >= lower.array()).all() &&
      (unconstrained.array() <= upper.array()).all()) {
    res.x = unconstrained;
    res.objective = objective(P, q, res.x);
    res.residual = projected_gradient_residual(P, q, lower, upper, res.x);
    res.converged = true;
    res.closed_form = true;
    return res;
  }

  Eigen::VectorXd x = clamp(unconstrained, lower, upper);
  double J = objective(P, q, x);
  if (options.warm_start && options.warm_start->size() == n) {
    const Eigen::VectorXd w = clamp(*options.warm_start, lower, upper);
    const double Jw = objective(P, q, w);
    if (Jw < J) {
      x = w;
      J = Jw;
    }
  }

  Eigen::VectorXd g = P * x + q;
  double alpha = 1.0 / std::max(P.diagonal().maxCoeff(), 1e-300);
  constexpr double kArmijo = 1e-4;

  for (int it = 0;; ++it) {
    res.residual = (x - clamp(x - g, lower, upper)).cwiseAbs().maxCoeff();
    if (res.residual <= options.tolerance) {
      res.converged = true;
      res.iterations = it;
      break;
    }
    if (it >= options.max_iterations) {
      res.iterations = it;
      break;
    }

    // Projected gradient step along the projection arc.
    Eigen::VectorXd x_next = x;
    double J_next = J;
    double step = alpha;
    for (int bt = 0; bt < 60; ++bt) {
      const Eigen::VectorXd cand = clamp(x - step * g, lower, upper);
      const double Jc = objective(P, q, cand);
      if (Jc <= J + kArmijo * g.dot(cand - x)) {
        x_next = cand;
        J_next = Jc;
        break;
      }
      step *= 0.5;
    }

    // Newton step restricted to variables that are not pinned at a bound.
    Eigen::VectorXd g_next = P * x_next + q;
    std::vector<Eigen::Index> free;
    free.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool pinned_low = x_next(i) <= lower(i) && g_next(i) > 0.0;
      const bool pinned_high = x_next(i) >= upper(i) && g_next(i) < 0.0;
      if (!pinned_low && !pinned_high) free.push_back(i);
    }
    if (!free.empty()) {
      const Eigen::MatrixXd Pff = P(free, free);
      Eigen::LLT<Eigen::MatrixXd> sub(Pff);
      if (sub.info() == Eigen::Success) {
        const Eigen::VectorXd d_free = sub.solve(-g_next(free));
        Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
        d(free) = d_free;
        double t = 1.0;
        for (int bt = 0; bt < 20; ++bt) {
          const Eigen::VectorXd cand = clamp(x_next + t * d, lower, upper);
          const double Jc = objective(P, q, cand);
          if (Jc < J_next) {
            x_next = cand;
            J_next = Jc;
            g_next = P * x_next + q;
            break;
          }
          t *= 0.5;
        }
      }
    }

    const Eigen::VectorXd s = x_next - x;
    const Eigen::VectorXd y = g_next - g;
    const double sy = s.dot(y);
    alpha = sy > 0.0 ? s.squaredNorm() / sy : 1.0 / std::max(P.diagonal().maxCoeff(), 1e-300);

    x = x_next;
    g = g_next;
    J = J_next;
    if (options.record_history) res.history.push_back(J);
  }

  res.x = x;
  res.objective = J;
  res.active_bounds = count_active(x, lower, upper);
  return res;
}

}  // namespace mmpc
