#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mmpc/box_qp.hpp"
#include "mmpc/error_dynamics.hpp"
#include "mmpc/errors.hpp"
#include "mmpc/manifold.hpp"
#include "mmpc/mpc.hpp"
#include "mmpc/quadrotor.hpp"
#include "mmpc/rotation.hpp"
#include "mmpc/scenario.hpp"
#include "mmpc/simulator.hpp"
#include "mmpc/surface.hpp"
#include "mmpc/trace_io.hpp"
#include "mmpc/ugv.hpp"

namespace py = pybind11;
using namespace mmpc;

namespace {

std::vector<Eigen::Vector3d> rows_to_points(const Eigen::MatrixXd& rows) {
  if (rows.cols() != 3) throw ContractViolation("expected an (n, 3) array of points");
  std::vector<Eigen::Vector3d> pts;
  pts.reserve(static_cast<std::size_t>(rows.rows()));
  for (Eigen::Index i = 0; i < rows.rows(); ++i) pts.emplace_back(rows.row(i).transpose());
  return pts;
}

Eigen::MatrixXd points_to_rows(const std::vector<Eigen::Vector3d>& pts) {
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(pts.size()), 3);
  for (std::size_t i = 0; i < pts.size(); ++i) rows.row(static_cast<Eigen::Index>(i)) = pts[i].transpose();
  return rows;
}

py::dict metrics_dict(const Metrics& m) {
  py::dict d;
  d["ticks"] = m.ticks;
  d["rms_position_error_m"] = m.rms_position_error;
  d["max_position_error_m"] = m.max_position_error;
  d["final_position_error_m"] = m.final_position_error;
  d["rms_attitude_error_rad"] = m.rms_attitude_error;
  d["max_attitude_error_rad"] = m.max_attitude_error;
  d["mean_solve_time_us"] = m.mean_solve_time_us;
  d["p99_solve_time_us"] = m.p99_solve_time_us;
  d["max_solve_time_us"] = m.max_solve_time_us;
  d["constraint_activity_rate"] = m.constraint_activity;
  d["mean_solver_iterations"] = m.mean_solver_iterations;
  d["nonconverged_ticks"] = m.nonconverged_ticks;
  return d;
}

Eigen::MatrixXd stack(const SimTrace& trace, Eigen::VectorXd TickRecord::*field) {
  if (trace.ticks.empty()) return {};
  Eigen::MatrixXd out(static_cast<Eigen::Index>(trace.ticks.size()), (trace.ticks.front().*field).size());
  for (std::size_t k = 0; k < trace.ticks.size(); ++k) {
    out.row(static_cast<Eigen::Index>(k)) = (trace.ticks[k].*field).transpose();
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Model predictive control on manifolds";

  py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_ValueError);
  py::register_exception<OutOfChartError>(m, "OutOfChartError", PyExc_ValueError);
  py::register_exception<TrackingLostError>(m, "TrackingLostError", PyExc_RuntimeError);
  py::register_exception<InfeasibleReferenceError>(m, "InfeasibleReferenceError", PyExc_RuntimeError);
  py::register_exception<DegenerateSampleError>(m, "DegenerateSampleError", PyExc_RuntimeError);
  py::register_exception<IllConditionedWeightsError>(m, "IllConditionedWeightsError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_RuntimeError);

  m.def("skew", &skew);
  m.def("so3_exp", &so3_exp, py::arg("delta"));
  m.def("so3_log", &so3_log, py::arg("R"));
  m.def("so2_exp", &so2_exp, py::arg("angle"));
  m.def("so2_log", &so2_log, py::arg("R"));
  m.def("a_matrix", &a_matrix, py::arg("theta"));

  py::class_<SurfaceModel>(m, "SurfaceModel")
      .def(py::init([](const std::array<double, 6>& c) { return SurfaceModel(c); }), py::arg("coefficients"))
      .def_property_readonly("coefficients", &SurfaceModel::coefficients)
      .def("height", py::overload_cast<double, double>(&SurfaceModel::height, py::const_))
      .def("gradient", &SurfaceModel::gradient)
      .def("hessian", &SurfaceModel::hessian);

  py::class_<SurfaceFit>(m, "SurfaceFit")
      .def_readonly("model", &SurfaceFit::model)
      .def_readonly("residual_rms", &SurfaceFit::residual_rms);
  m.def("fit_surface", [](const Eigen::MatrixXd& pts) { return fit_surface(rows_to_points(pts)); },
        py::arg("points"));
  m.def("synthesize_surface_samples",
        [](const SurfaceModel& s, const Eigen::Vector2d& lo, const Eigen::Vector2d& hi, double spacing,
           double noise_std, std::uint64_t seed) {
          return points_to_rows(synthesize_surface_samples(s, lo, hi, spacing, noise_std, seed));
        },
        py::arg("surface"), py::arg("lower"), py::arg("upper"), py::arg("spacing"),
        py::arg("noise_std") = 0.0, py::arg("seed") = 0);

  py::class_<ManifoldPoint>(m, "ManifoldPoint")
      .def_property_readonly("coords", &ManifoldPoint::coords)
      .def_property_readonly("manifold", &ManifoldPoint::manifold);

  py::class_<Manifold>(m, "Manifold")
      .def_static("euclidean", &Manifold::euclidean)
      .def_static("rot2", &Manifold::rot2)
      .def_static("rot3", &Manifold::rot3)
      .def_static("sphere2", &Manifold::sphere2, py::arg("radius"))
      .def_static("surface", &Manifold::surface)
      .def_static("product", &Manifold::product)
      .def_property_readonly("tangent_dim", &Manifold::tangent_dim)
      .def_property_readonly("exogenous_dim", &Manifold::exogenous_dim)
      .def_property_readonly("ambient_dim", &Manifold::ambient_dim)
      .def_property_readonly("name", &Manifold::name)
      .def("point", &Manifold::point, py::arg("coords"))
      .def("origin", &Manifold::origin)
      .def("boxplus", &Manifold::boxplus)
      .def("boxminus", &Manifold::boxminus)
      .def("oplus", &Manifold::oplus)
      .def("gx", &Manifold::gx)
      .def("gf", &Manifold::gf);

  py::class_<CanonicalSystem>(m, "CanonicalSystem")
      .def_readonly("name", &CanonicalSystem::name)
      .def_readonly("manifold", &CanonicalSystem::manifold)
      .def_readonly("input_dim", &CanonicalSystem::input_dim)
      .def("f", [](const CanonicalSystem& s, const ManifoldPoint& x, const Eigen::VectorXd& u) { return s.f(x, u); })
      .def("df_dx", [](const CanonicalSystem& s, const ManifoldPoint& x, const Eigen::VectorXd& u) { return s.df_dx(x, u); })
      .def("df_du", [](const CanonicalSystem& s, const ManifoldPoint& x, const Eigen::VectorXd& u) { return s.df_du(x, u); });

  py::class_<ReferencePoint>(m, "ReferencePoint")
      .def(py::init<ManifoldPoint, Eigen::VectorXd>(), py::arg("x"), py::arg("u"))
      .def_readonly("x", &ReferencePoint::x)
      .def_readonly("u", &ReferencePoint::u);

  py::class_<LinearizedErrorDynamics>(m, "LinearizedErrorDynamics")
      .def_readonly("Fx", &LinearizedErrorDynamics::Fx)
      .def_readonly("Fu", &LinearizedErrorDynamics::Fu)
      .def_readonly("dt", &LinearizedErrorDynamics::dt);

  m.def("step", &step, py::arg("system"), py::arg("x"), py::arg("u"), py::arg("dt"));
  m.def("error_state", &error_state);
  m.def("linearize", &linearize, py::arg("system"), py::arg("reference"), py::arg("dt"));
  m.def("fd_error_jacobians", &fd_error_jacobians, py::arg("system"), py::arg("reference"),
        py::arg("dt"), py::arg("h") = 1e-6);

  m.def("quad_system", [](double gravity) { return quad_system(QuadrotorParams{gravity}); },
        py::arg("gravity") = 9.81);
  m.def("quad_point",
        [](const Eigen::Vector3d& p, const Eigen::Vector3d& v, const Eigen::Matrix3d& R) {
          return quad_point(QuadrotorState{p, v, R});
        },
        py::arg("p"), py::arg("v"), py::arg("R"));
  m.def("quad_hover_reference",
        [](const Eigen::Vector3d& pos, double dt, int count) {
          return quad_reference_sequence(hover_trajectory(pos), {}, dt, count);
        },
        py::arg("position"), py::arg("dt"), py::arg("count"));
  m.def("quad_circle_reference",
        [](double radius, double max_speed, double ramp_time, bool path_tangent, double dt, int count) {
          const auto traj = circle_trajectory(radius, {max_speed, ramp_time},
                                              path_tangent ? YawPolicy::PathTangent : YawPolicy::FixedZero);
          return quad_reference_sequence(traj, {}, dt, count);
        },
        py::arg("radius"), py::arg("max_speed"), py::arg("ramp_time"), py::arg("path_tangent") = true,
        py::arg("dt") = 0.01, py::arg("count") = 100);

  m.def("ugv_system", &ugv_system, py::arg("surface"));
  m.def("ugv_point", &ugv_point, py::arg("surface"), py::arg("xy"), py::arg("heading"));
  m.def("ugv_sine_reference",
        [](const SurfaceModel& s, double amplitude, double wavelength, double speed, double dt, int count) {
          return ugv_reference(sine_path({0, 0}, 0.0, amplitude, wavelength), s, speed, dt, count);
        },
        py::arg("surface"), py::arg("amplitude"), py::arg("wavelength"), py::arg("speed"),
        py::arg("dt"), py::arg("count"));

  py::class_<BoxQpResult>(m, "BoxQpResult")
      .def_readonly("x", &BoxQpResult::x)
      .def_readonly("objective", &BoxQpResult::objective)
      .def_readonly("residual", &BoxQpResult::residual)
      .def_readonly("iterations", &BoxQpResult::iterations)
      .def_readonly("active_bounds", &BoxQpResult::active_bounds)
      .def_readonly("converged", &BoxQpResult::converged)
      .def_readonly("closed_form", &BoxQpResult::closed_form);
  m.def("solve_box_qp",
        [](const Eigen::MatrixXd& P, const Eigen::VectorXd& q, const Eigen::VectorXd& lo,
           const Eigen::VectorXd& hi, double tolerance, int max_iterations) {
          BoxQpOptions opts;
          opts.tolerance = tolerance;
          opts.max_iterations = max_iterations;
          return solve_box_qp(P, q, lo, hi, opts);
        },
        py::arg("P"), py::arg("q"), py::arg("lower"), py::arg("upper"), py::arg("tolerance") = 1e-8,
        py::arg("max_iterations") = 1000);

  py::class_<MpcConfig>(m, "MpcConfig")
      .def(py::init([](int horizon, double dt, const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                       const Eigen::VectorXd& u_min, const Eigen::VectorXd& u_max) {
             MpcConfig cfg;
             cfg.horizon = horizon;
             cfg.dt = dt;
             cfg.state_weights = {Q};
             cfg.input_weights = {R};
             cfg.u_min = u_min;
             cfg.u_max = u_max;
             return cfg;
           }),
           py::arg("horizon"), py::arg("dt"), py::arg("Q"), py::arg("R"), py::arg("u_min"), py::arg("u_max"))
      .def_readwrite("horizon", &MpcConfig::horizon)
      .def_readwrite("dt", &MpcConfig::dt)
      .def_readwrite("terminal_weight", &MpcConfig::terminal_weight)
      .def_readwrite("tolerance", &MpcConfig::tolerance)
      .def_readwrite("max_iterations", &MpcConfig::max_iterations)
      .def("validate", &MpcConfig::validate);

  py::class_<MpcSolution>(m, "MpcSolution")
      .def_readonly("delta_u", &MpcSolution::delta_u)
      .def_readonly("u0", &MpcSolution::u0)
      .def_readonly("predicted_dx", &MpcSolution::predicted_dx)
      .def_readonly("objective", &MpcSolution::objective)
      .def_readonly("iterations", &MpcSolution::iterations)
      .def_readonly("active_bounds", &MpcSolution::active_bounds)
      .def_readonly("converged", &MpcSolution::converged);
  m.def("mpc_step",
        [](const CanonicalSystem& sys, const MpcConfig& cfg, const ManifoldPoint& x,
           const std::vector<ReferencePoint>& window) {
          cfg.validate(sys.manifold.tangent_dim(), sys.input_dim);
          return mpc_step(sys, cfg, x, window);
        },
        py::arg("system"), py::arg("config"), py::arg("x"), py::arg("window"));

  m.def("list_scenarios", [] {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& b : bundled_scenarios()) out.emplace_back(b.id, b.description);
    return out;
  });
  m.def("scenario_json", [](const std::string& id_or_path) { return scenario_to_json(resolve_scenario(id_or_path)); });
  m.def("run_scenario",
        [](const std::string& id_or_path, std::optional<double> duration, std::optional<std::uint64_t> seed) {
          Scenario sc = resolve_scenario(id_or_path);
          if (duration) sc.duration_s = *duration;
          if (seed) sc.disturbance.seed = *seed;
          SimTrace trace;
          {
            py::gil_scoped_release release;
            trace = rollout(sc);
          }
          py::dict result;
          result["scenario"] = trace.scenario;
          result["failed"] = trace.failed;
          result["failure"] = trace.failure;
          result["header"] = trace_header(trace);
          Eigen::VectorXd t(static_cast<Eigen::Index>(trace.ticks.size()));
          for (std::size_t k = 0; k < trace.ticks.size(); ++k) t(static_cast<Eigen::Index>(k)) = trace.ticks[k].t;
          result["t"] = t;
          result["state"] = stack(trace, &TickRecord::state);
          result["reference"] = stack(trace, &TickRecord::reference);
          result["dx"] = stack(trace, &TickRecord::dx);
          result["u"] = stack(trace, &TickRecord::u);
          result["u_d"] = stack(trace, &TickRecord::u_d);
          result["metrics"] = metrics_dict(compute_metrics(trace));
          result["summary_json"] = summary_json(trace, compute_metrics(trace));
          return result;
        },
        py::arg("scenario"), py::arg("duration") = py::none(), py::arg("seed") = py::none());
}
