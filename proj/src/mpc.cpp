#include "mmpc/mpc.hpp"

#include <Eigen/Cholesky>
#include <sstream>

#include "mmpc/errors.hpp"

namespace mmpc {

namespace {

void check_weight(const Eigen::MatrixXd& W, int dim, const std::string& what) {
  if (W.rows() != dim || W.cols() != dim) {
    std::ostringstream msg;
    msg << what << " must be " << dim << "x" << dim << ", got " << W.rows() << "x" << W.cols();
    throw ConfigError(msg.str());
  }
  if (!W.allFinite()) throw ConfigError(what + " has non-finite entries");
  const double scale = std::max(1.0, W.cwiseAbs().maxCoeff());
  if ((W - W.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ConfigError(what + " is not symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(W);
  if (llt.info() != Eigen::Success) throw ConfigError(what + " is not positive definite");
}

}  // namespace

void MpcConfig::validate(int state_dim, int input_dim) const {
  if (horizon < 1) throw ConfigError("horizon must be at least 1");
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(tolerance > 0.0)) throw ConfigError("solver tolerance must be positive");
  if (max_iterations < 1) throw ConfigError("solver iteration cap must be at least 1");
  const auto N = static_cast<std::size_t>(horizon);
  if (state_weights.size() != 1 && state_weights.size() != N) {
    throw ConfigError("state_weights must hold 1 or N matrices");
  }
  if (input_weights.size() != 1 && input_weights.size() != N) {
    throw ConfigError("input_weights must hold 1 or N matrices");
  }
  // Q_0 never enters the cost, but a malformed entry is still rejected.
  for (std::size_t k = 0; k < state_weights.size(); ++k) {
    check_weight(state_weights[k], state_dim, "state weight Q_" + std::to_string(k));
  }
  for (std::size_t k = 0; k < input_weights.size(); ++k) {
    check_weight(input_weights[k], input_dim, "input weight R_" + std::to_string(k));
  }
  if (terminal_weight) check_weight(*terminal_weight, state_dim, "terminal weight P_N");
  if (u_min.size() != input_dim || u_max.size() != input_dim) {
    throw ConfigError("input bounds must have length " + std::to_string(input_dim));
  }
  for (int i = 0; i < input_dim; ++i) {
    if (!(u_min(i) < u_max(i))) {
      std::ostringstream msg;
      msg << "input bound on channel " << i << " is empty or degenerate (u_min = " << u_min(i)
          << ", u_max = " << u_max(i) << "); u_min < u_max is required";
      throw ConfigError(msg.str());
    }
  }
}

const Eigen::MatrixXd& MpcConfig::state_weight(int k) const {
  return state_weights.size() == 1 ? state_weights.front()
                                   : state_weights.at(static_cast<std::size_t>(k));
}

const Eigen::MatrixXd& MpcConfig::terminal() const {
  return terminal_weight ? *terminal_weight : state_weight(horizon - 1);
}

const Eigen::MatrixXd& MpcConfig::input_weight(int k) const {
  return input_weights.size() == 1 ? input_weights.front()
                                   : input_weights.at(static_cast<std::size_t>(k));
}

Eigen::MatrixXd CondensedQp::hessian() const {
  // Qbar is block diagonal, so Qbar M is formed block row by block row.
  Eigen::MatrixXd QM(M.rows(), M.cols());
  for (int k = 0; k < horizon; ++k) {
    QM.middleRows(k * state_dim, state_dim).noalias() =
        Qbar.block(k * state_dim, k * state_dim, state_dim, state_dim) *
        M.middleRows(k * state_dim, state_dim);
  }
  Eigen::MatrixXd P = Rbar;
  P.noalias() += M.transpose() * QM;
  return 0.5 * (P + P.transpose());
}

Eigen::VectorXd CondensedQp::linear_term(const Eigen::VectorXd& dx0) const {
  return M.transpose() * (Qbar * (H * dx0));
}

Eigen::VectorXd CondensedQp::predict(const Eigen::VectorXd& dU, const Eigen::VectorXd& dx0) const {
  return M * dU + H * dx0;
}

double CondensedQp::cost(const Eigen::VectorXd& dU, const Eigen::VectorXd& dx0) const {
  const Eigen::VectorXd dX = predict(dU, dx0);
  return dX.dot(Qbar * dX) + dU.dot(Rbar * dU);
}

CondensedQp build_condensed(std::span<const LinearizedErrorDynamics> dynamics,
                            const MpcConfig& cfg) {
  const int N = cfg.horizon;
  if (static_cast<int>(dynamics.size()) != N) {
    throw ContractViolation("build_condensed: expected " + std::to_string(N) +
                            " linearized steps, got " + std::to_string(dynamics.size()));
  }
  const int n = static_cast<int>(dynamics.front().Fx.rows());
  const int m = static_cast<int>(dynamics.front().Fu.cols());
  for (const auto& d : dynamics) {
    if (d.Fx.rows() != n || d.Fx.cols() != n || d.Fu.rows() != n || d.Fu.cols() != m ||
        d.ref.u.size() != m) {
      throw ContractViolation("build_condensed: inconsistent Fx/Fu shapes");
    }
  }

  CondensedQp qp;
  qp.horizon = N;
  qp.state_dim = n;
  qp.input_dim = m;
  qp.M = Eigen::MatrixXd::Zero(N * n, N * m);
  qp.H.resize(N * n, n);
  qp.Qbar = Eigen::MatrixXd::Zero(N * n, N * n);
  qp.Rbar = Eigen::MatrixXd::Zero(N * m, N * m);
  qp.lower.resize(N * m);
  qp.upper.resize(N * m);

  // Row block i predicts dx_{i+1}: M(i, j) = Fx_i ... Fx_{j+1} Fu_j, H(i) = Fx_i ... Fx_0.
  for (int i = 0; i < N; ++i) {
    const auto& Fx = dynamics[static_cast<std::size_t>(i)].Fx;
    if (i == 0) {
      qp.H.topRows(n) = Fx;
    } else {
      qp.H.middleRows(i * n, n).noalias() = Fx * qp.H.middleRows((i - 1) * n, n);
      for (int j = 0; j < i; ++j) {
        qp.M.block(i * n, j * m, n, m).noalias() = Fx * qp.M.block((i - 1) * n, j * m, n, m);
      }
    }
    qp.M.block(i * n, i * m, n, m) = dynamics[static_cast<std::size_t>(i)].Fu;

    const Eigen::MatrixXd& Q = (i + 1 < N) ? cfg.state_weight(i + 1) : cfg.terminal();
    qp.Qbar.block(i * n, i * n, n, n) = Q;
    qp.Rbar.block(i * m, i * m, m, m) = cfg.input_weight(i);
    const Eigen::VectorXd& ud = dynamics[static_cast<std::size_t>(i)].ref.u;
    qp.lower.segment(i * m, m) = cfg.u_min - ud;
    qp.upper.segment(i * m, m) = cfg.u_max - ud;
  }
  return qp;
}

Eigen::VectorXd solve_unconstrained(const CondensedQp& qp, const Eigen::VectorXd& dx0) {
  Eigen::LLT<Eigen::MatrixXd> llt(qp.hessian());
  if (llt.info() != Eigen::Success) {
    throw IllConditionedWeightsError("solve_unconstrained: M'QM + R is not positive definite");
  }
  return llt.solve(-qp.linear_term(dx0));
}

MpcSolution solve_box_qp(const CondensedQp& qp, const Eigen::VectorXd& dx0,
                         const std::optional<Eigen::VectorXd>& warm_start, double tolerance,
                         int max_iterations) {
  if (dx0.size() != qp.state_dim) throw ContractViolation("solve_box_qp: dx0 has wrong length");
  BoxQpOptions opts;
  opts.tolerance = tolerance;
  opts.max_iterations = max_iterations;
  opts.warm_start = warm_start;
  const BoxQpResult r = solve_box_qp(qp.hessian(), qp.linear_term(dx0), qp.lower, qp.upper, opts);

  MpcSolution sol;
  sol.delta_u = r.x;
  sol.predicted_dx = qp.predict(r.x, dx0);
  sol.objective = qp.cost(r.x, dx0);
  sol.residual = r.residual;
  sol.iterations = r.iterations;
  sol.active_bounds = r.active_bounds;
  sol.converged = r.converged;
  sol.closed_form = r.closed_form;
  return sol;
}

MpcSolution mpc_step(const CanonicalSystem& sys, const MpcConfig& cfg, const ManifoldPoint& x_now,
                     std::span<const ReferencePoint> window,
                     const std::optional<Eigen::VectorXd>& warm_start) {
  if (static_cast<int>(window.size()) != cfg.horizon) {
    throw ContractViolation("mpc_step: reference window must hold exactly N points");
  }
  Eigen::VectorXd dx0;
  try {
    dx0 = error_state(sys.manifold, x_now, window.front().x);
  } catch (const OutOfChartError& e) {
    throw TrackingLostError(std::string("mpc_step: state outside the reference chart: ") +
                            e.what());
  }

  std::vector<LinearizedErrorDynamics> lin;
  lin.reserve(window.size());
  for (const auto& ref : window) lin.push_back(linearize(sys, ref, cfg.dt));
  const CondensedQp qp = build_condensed(lin, cfg);

  MpcSolution sol = solve_box_qp(qp, dx0, warm_start, cfg.tolerance, cfg.max_iterations);
  const int m = sys.input_dim;
  sol.u0 = (window.front().u + sol.delta_u.head(m)).cwiseMax(cfg.u_min).cwiseMin(cfg.u_max);
  return sol;
}

MpcController::MpcController(CanonicalSystem sys, MpcConfig cfg)
    : sys_(std::move(sys)), cfg_(std::move(cfg)) {
  cfg_.validate(sys_.manifold.tangent_dim(), sys_.input_dim);
}

MpcSolution MpcController::step(const ManifoldPoint& x_now,
                                std::span<const ReferencePoint> window) {
  const int N = cfg_.horizon;
  const int m = sys_.input_dim;
  std::optional<Eigen::VectorXd> warm;
  if (previous_inputs_ && static_cast<int>(window.size()) == N) {
    Eigen::VectorXd shifted(N * m);
    shifted.head((N - 1) * m) = previous_inputs_->tail((N - 1) * m);
    shifted.tail(m) = previous_inputs_->tail(m);
    for (int k = 0; k < N; ++k) shifted.segment(k * m, m) -= window[static_cast<std::size_t>(k)].u;
    warm = std::move(shifted);
  }
  MpcSolution sol = mpc_step(sys_, cfg_, x_now, window, warm);
  Eigen::VectorXd absolute = sol.delta_u;
  for (int k = 0; k < N; ++k) absolute.segment(k * m, m) += window[static_cast<std::size_t>(k)].u;
  previous_inputs_ = std::move(absolute);
  return sol;
}

}  // namespace mmpc
