#include "mmpc/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "mmpc/errors.hpp"

namespace mmpc {

TraceLayout TraceLayout::generic(const CanonicalSystem& sys) {
  TraceLayout layout;
  for (int i = 0; i < sys.manifold.ambient_dim(); ++i) layout.state_labels.push_back("x" + std::to_string(i));
  for (int i = 0; i < sys.manifold.tangent_dim(); ++i) layout.error_labels.push_back("e" + std::to_string(i));
  for (int i = 0; i < sys.input_dim; ++i) layout.input_labels.push_back("u" + std::to_string(i));
  layout.position_offset = sys.manifold.ambient_dim() >= 3 ? 0 : -1;
  return layout;
}

SimTrace rollout(const CanonicalSystem& sys, const MpcConfig& cfg,
                 std::span<const ReferencePoint> refs, const RolloutOptions& options,
                 const TraceLayout& layout) {
  if (refs.empty()) throw ContractViolation("rollout: empty reference sequence");
  if (options.substeps < 1) throw ConfigError("substeps must be at least 1");
  if (!(options.duration > 0.0)) throw ConfigError("duration must be positive");
  const double steps = options.duration / cfg.dt;
  const long K = std::lround(steps);
  if (K < 1 || std::abs(steps - static_cast<double>(K)) > 1e-6) {
    throw ConfigError("duration must be a whole number of control steps");
  }
  const int l = sys.manifold.exogenous_dim();
  if (options.disturbance.f_std.size() != 0 && options.disturbance.f_std.size() != l) {
    throw ConfigError("disturbance std must have one entry per component of f (" +
                      std::to_string(l) + ")");
  }

  MpcController controller(sys, cfg);
  const int N = cfg.horizon;
  const double h = cfg.dt / options.substeps;

  std::mt19937_64 rng(options.disturbance.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const bool noisy = options.disturbance.active();

  SimTrace trace;
  trace.dt = cfg.dt;
  trace.layout = layout;
  trace.ticks.reserve(static_cast<std::size_t>(K));

  ManifoldPoint x = refs.front().x;
  if (options.initial_offset.size() != 0) {
    if (options.initial_offset.size() != sys.manifold.tangent_dim()) {
      throw ConfigError("initial offset must have length " +
                        std::to_string(sys.manifold.tangent_dim()));
    }
    x = sys.manifold.boxplus(x, options.initial_offset);
  }

  auto ref_at = [&](long k) -> const ReferencePoint& {
    return refs[static_cast<std::size_t>(std::min<long>(k, static_cast<long>(refs.size()) - 1))];
  };

  std::vector<ReferencePoint> window;
  window.reserve(static_cast<std::size_t>(N));
  for (long k = 0; k < K; ++k) {
    window.clear();
    for (int j = 0; j < N; ++j) window.push_back(ref_at(k + j));

    TickRecord tick;
    tick.t = static_cast<double>(k) * cfg.dt;
    tick.state = x.coords();
    tick.reference = window.front().x.coords();
    tick.u_d = window.front().u;

    MpcSolution sol;
    try {
      const auto start = std::chrono::steady_clock::now();
      sol = controller.step(x, window);
      const auto stop = std::chrono::steady_clock::now();
      tick.solve_time_us = std::chrono::duration<double, std::micro>(stop - start).count();
      tick.dx = error_state(sys.manifold, x, window.front().x);
    } catch (const TrackingLostError& e) {
      trace.failed = true;
      trace.failure = e.what();
      break;
    }
    tick.u = sol.u0;
    tick.solver_iterations = sol.iterations;
    tick.active_bounds = sol.active_bounds;
    tick.converged = sol.converged;
    if (!sol.converged) ++trace.nonconverged_ticks;
    trace.ticks.push_back(std::move(tick));

    for (int s = 0; s < options.substeps; ++s) {
      Eigen::VectorXd f = sys.perturbation(x, sol.u0);
      if (noisy) {
        for (int i = 0; i < l; ++i) f(i) += options.disturbance.f_std(i) * normal(rng);
      }
      x = sys.manifold.oplus(x, h * f);
    }
    if (!x.coords().allFinite() ||
        !sys.manifold.contains(x.coords(), options.invariant_tolerance)) {
      trace.failed = true;
      trace.failure = "truth state left the manifold at t = " +
                      std::to_string(static_cast<double>(k + 1) * cfg.dt);
      break;
    }
  }
  return trace;
}

double position_error(const SimTrace& trace, const TickRecord& tick) {
  const int p = trace.layout.position_offset;
  if (p < 0) return 0.0;
  return (tick.state.segment<3>(p) - tick.reference.segment<3>(p)).norm();
}

double attitude_error(const SimTrace& trace, const TickRecord& tick) {
  const int a = trace.layout.attitude_offset;
  if (a < 0) return 0.0;
  return tick.dx.segment(a, trace.layout.attitude_dim).norm();
}

Metrics compute_metrics(const SimTrace& trace, double from_time) {
  Metrics m;
  std::vector<double> times;
  double sum_pos2 = 0.0;
  double sum_att2 = 0.0;
  double sum_iters = 0.0;
  int active = 0;
  for (const auto& tick : trace.ticks) {
    if (tick.t < from_time - 1e-12) continue;
    const double ep = position_error(trace, tick);
    const double ea = attitude_error(trace, tick);
    sum_pos2 += ep * ep;
    sum_att2 += ea * ea;
    m.max_position_error = std::max(m.max_position_error, ep);
    m.max_attitude_error = std::max(m.max_attitude_error, ea);
    m.final_position_error = ep;
    sum_iters += tick.solver_iterations;
    if (tick.active_bounds > 0) ++active;
    if (!tick.converged) ++m.nonconverged_ticks;
    times.push_back(tick.solve_time_us);
    ++m.ticks;
  }
  if (m.ticks == 0) return m;
  const double n = m.ticks;
  m.rms_position_error = std::sqrt(sum_pos2 / n);
  m.rms_attitude_error = std::sqrt(sum_att2 / n);
  m.mean_solver_iterations = sum_iters / n;
  m.constraint_activity = active / n;
  double total = 0.0;
  for (double t : times) total += t;
  m.mean_solve_time_us = total / n;
  std::sort(times.begin(), times.end());
  const auto idx = static_cast<std::size_t>(std::ceil(0.99 * n)) - 1;
  m.p99_solve_time_us = times[std::min(idx, times.size() - 1)];
  m.max_solve_time_us = times.back();
  return m;
}

}  // namespace mmpc
