#pragma once

#include <Eigen/Core>
#include <functional>
#include <limits>
#include <vector>

#include "mmpc/error_dynamics.hpp"
#include "mmpc/surface.hpp"

namespace mmpc {

// Ground vehicle on a smooth surface z = F(x, y). State is S x SO(2): the
// contact point and the heading of the body x axis projected on the plane.
// Input is u = [v_x, w_z], the forward speed along the surface and the yaw rate.

Manifold ugv_manifold(const SurfaceModel& surface);
ManifoldPoint ugv_point(const SurfaceModel& surface, const Eigen::Vector2d& xy, double heading);

/// 1 / sqrt(1 + (g' R e1)^2), g the surface gradient at xy.
double ugv_alpha(const SurfaceModel& surface, const Eigen::Vector2d& xy, const Eigen::Matrix2d& R);
/// 1 / sqrt(1 + g' g)
double ugv_beta(const SurfaceModel& surface, const Eigen::Vector2d& xy);

/// f = [alpha R e1 v_x; beta w_z], l = 3.
CanonicalSystem ugv_system(const SurfaceModel& surface);

/// Planar path parameterized by s; the parameter is close to arc length.
struct Path2d {
  std::function<Eigen::Vector2d(double)> at;
};

Path2d straight_path(const Eigen::Vector2d& origin, double heading);
/// Counter-clockwise circle starting at center + radius (cos a0, sin a0).
Path2d circle_path(const Eigen::Vector2d& center, double radius, double start_angle = 0.0);
/// origin + s d + A sin(2 pi s / wavelength) n, d = (cos heading, sin heading), n its left normal.
Path2d sine_path(const Eigen::Vector2d& origin, double heading, double amplitude,
                 double wavelength);

struct UgvReferenceLimits {
  double v_max = std::numeric_limits<double>::infinity();
  double omega_max = std::numeric_limits<double>::infinity();
};

/**
 * Reference points along the lifted path, consecutive points a constant
 * surface chord v_d dt apart. Heading k points along the planar chord to
 * point k+1, and the inputs are chosen so that one step of the canonical
 * dynamics maps reference k onto reference k+1.
 *
 * Throws InfeasibleReferenceError when a required speed or yaw rate exceeds
 * the limits.
 */
std::vector<ReferencePoint> ugv_reference(const Path2d& path, const SurfaceModel& surface,
                                          double v_d, double dt, int count,
                                          const UgvReferenceLimits& limits = {});

}  // namespace mmpc
