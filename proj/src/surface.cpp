#include "mmpc/surface.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "mmpc/errors.hpp"

namespace mmpc {

SurfaceModel::SurfaceModel(const Coefficients& gamma) : gamma_(gamma) {
  for (double g : gamma_) {
    if (!std::isfinite(g)) throw ContractViolation("SurfaceModel: non-finite coefficient");
  }
}

SurfaceModel SurfaceModel::flat(double height) {
  return SurfaceModel({0.0, 0.0, 0.0, 0.0, 0.0, height});
}

double SurfaceModel::height(double x, double y) const {
  const auto& g = gamma_;
  return g[0] * x * x + g[1] * x * y + g[2] * y * y + g[3] * x + g[4] * y + g[5];
}

Eigen::Vector2d SurfaceModel::gradient(const Eigen::Vector2d& xy) const {
  const auto& g = gamma_;
  return {2.0 * g[0] * xy.x() + g[1] * xy.y() + g[3],
          g[1] * xy.x() + 2.0 * g[2] * xy.y() + g[4]};
}

Eigen::Matrix2d SurfaceModel::hessian() const {
  Eigen::Matrix2d h;
  h << 2.0 * gamma_[0], gamma_[1], gamma_[1], 2.0 * gamma_[2];
  return h;
}

SurfaceFit fit_surface(std::span<const Eigen::Vector3d> points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  if (n < 6) {
    throw DegenerateSampleError("fit_surface: need at least 6 samples, got " +
                                std::to_string(n));
  }
  // Center the abscissae so the monomial columns stay well scaled far from the origin.
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& p : points) mean += p.head<2>();
  mean /= static_cast<double>(n);
  double scale = 0.0;
  for (const auto& p : points) scale = std::max(scale, (p.head<2>() - mean).cwiseAbs().maxCoeff());
  if (scale == 0.0) scale = 1.0;

  Eigen::MatrixXd design(n, 6);
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = (points[i].x() - mean.x()) / scale;
    const double v = (points[i].y() - mean.y()) / scale;
    design.row(i) << u * u, u * v, v * v, u, v, 1.0;
    z(i) = points[i].z();
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < 6) {
    throw DegenerateSampleError("fit_surface: design matrix is rank deficient");
  }
  const Eigen::VectorXd c = qr.solve(z);

  // Undo the affine change of variables u = (x - mx)/s, v = (y - my)/s.
  const double s2 = scale * scale;
  const double a = c(0) / s2, b = c(1) / s2, d = c(2) / s2;
  const double e = c(3) / scale, f = c(4) / scale;
  const double mx = mean.x(), my = mean.y();
  SurfaceModel::Coefficients gamma{
      a,
      b,
      d,
      -2.0 * a * mx - b * my + e,
      -b * mx - 2.0 * d * my + f,
      a * mx * mx + b * mx * my + d * my * my - e * mx - f * my + c(5)};

  SurfaceFit fit{SurfaceModel(gamma), 0.0};
  double sq = 0.0;
  for (const auto& p : points) {
    const double r = fit.model.height(p.x(), p.y()) - p.z();
    sq += r * r;
  }
  fit.residual_rms = std::sqrt(sq / static_cast<double>(n));
  return fit;
}

SurfaceFit fit_surface_local(std::span<const Eigen::Vector3d> points,
                             const Eigen::Vector2d& center, std::size_t count) {
  if (points.size() <= count) return fit_surface(points);
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto dist2 = [&](std::size_t i) { return (points[i].head<2>() - center).squaredNorm(); };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count),
                    order.end(), [&](std::size_t a, std::size_t b) {
                      const double da = dist2(a), db = dist2(b);
                      return da < db || (da == db && a < b);
                    });
  std::vector<Eigen::Vector3d> window;
  window.reserve(count);
  for (std::size_t i = 0; i < count; ++i) window.push_back(points[order[i]]);
  return fit_surface(window);
}

std::vector<Eigen::Vector3d> synthesize_surface_samples(const SurfaceModel& surface,
                                                        const Eigen::Vector2d& lower,
                                                        const Eigen::Vector2d& upper,
                                                        double spacing, double noise_std,
                                                        unsigned long seed) {
  if (!(spacing > 0.0) || (upper.array() < lower.array()).any()) {
    throw ContractViolation("synthesize_surface_samples: bad grid");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const auto nx = static_cast<int>(std::floor((upper.x() - lower.x()) / spacing + 1e-9)) + 1;
  const auto ny = static_cast<int>(std::floor((upper.y() - lower.y()) / spacing + 1e-9)) + 1;
  std::vector<Eigen::Vector3d> out;
  out.reserve(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const double x = lower.x() + i * spacing;
      const double y = lower.y() + j * spacing;
      double z = surface.height(x, y);
      if (noise_std > 0.0) z += noise_std * noise(rng);
      out.emplace_back(x, y, z);
    }
  }
  return out;
}

std::vector<Eigen::Vector3d> read_surface_samples(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open surface sample file: " + path.string());
  std::vector<Eigen::Vector3d> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    ss.imbue(std::locale::classic());
    double x, y, z;
    if (!(ss >> x >> y >> z)) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected 'x y z'");
    }
    out.emplace_back(x, y, z);
  }
  return out;
}

void write_surface_samples(const std::filesystem::path& path,
                           std::span<const Eigen::Vector3d> points) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write surface sample file: " + path.string());
  out.imbue(std::locale::classic());
  out << std::setprecision(17);
  for (const auto& p : points) out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
}

}  // namespace mmpc
