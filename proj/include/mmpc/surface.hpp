#pragma once

#include <Eigen/Core>
#include <array>
#include <filesystem>
#include <span>
#include <vector>

namespace mmpc {

/// Height field z = g1 x^2 + g2 xy + g3 y^2 + g4 x + g5 y + g6.
class SurfaceModel {
 public:
  using Coefficients = std::array<double, 6>;

  SurfaceModel() = default;
  explicit SurfaceModel(const Coefficients& gamma);

  static SurfaceModel flat(double height = 0.0);

  const Coefficients& coefficients() const { return gamma_; }

  double height(double x, double y) const;
  double height(const Eigen::Vector2d& xy) const { return height(xy.x(), xy.y()); }

  /// (dF/dx, dF/dy)
  Eigen::Vector2d gradient(const Eigen::Vector2d& xy) const;

  /// [[Fxx, Fxy], [Fyx, Fyy]]; constant for a quadratic.
  Eigen::Matrix2d hessian() const;

  bool operator==(const SurfaceModel& other) const = default;

 private:
  Coefficients gamma_{};
};

struct SurfaceFit {
  SurfaceModel model;
  double residual_rms = 0.0;
};

/// Least-squares quadratic fit. Throws DegenerateSampleError with fewer than six
/// samples or a rank-deficient design matrix.
SurfaceFit fit_surface(std::span<const Eigen::Vector3d> points);

/// Fit using only the `count` samples whose (x, y) lie nearest to `center`.
SurfaceFit fit_surface_local(std::span<const Eigen::Vector3d> points,
                             const Eigen::Vector2d& center, std::size_t count = 25);

/// Samples of `surface` on a regular grid, with optional Gaussian z-noise.
std::vector<Eigen::Vector3d> synthesize_surface_samples(const SurfaceModel& surface,
                                                        const Eigen::Vector2d& lower,
                                                        const Eigen::Vector2d& upper,
                                                        double spacing, double noise_std = 0.0,
                                                        unsigned long seed = 0);

/// Plain text, one "x y z" triple per line. Blank lines and '#' comments are skipped.
std::vector<Eigen::Vector3d> read_surface_samples(const std::filesystem::path& path);
void write_surface_samples(const std::filesystem::path& path,
                           std::span<const Eigen::Vector3d> points);

}  // namespace mmpc
