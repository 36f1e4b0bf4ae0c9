#pragma once

#include <Eigen/Core>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mmpc/surface.hpp"

namespace mmpc {

enum class ManifoldKind { Euclidean, Rot2, Rot3, Sphere2, Surface2D, Product };

class ManifoldPoint;

/**
 * Immutable descriptor of a state manifold: one of the primitives or a
 * cartesian product of them. Copies share the underlying description.
 *
 * Three dimensions matter:
 *   - tangent (n): length of boxplus/boxminus perturbations,
 *   - exogenous (l): length of oplus perturbations, e.g. 3 for a sphere
 *     driven by angular velocity while its tangent space is 2-D,
 *   - ambient: length of the stored coordinates (SO(n) matrices are stored
 *     column-major).
 *
 * Operations on product manifolds act block-wise on the components.
 */
class Manifold {
 public:
  static Manifold euclidean(int dim);
  static Manifold rot2();
  static Manifold rot3();
  static Manifold sphere2(double radius);
  static Manifold surface(const SurfaceModel& surface);
  static Manifold product(std::vector<Manifold> components);

  ManifoldKind kind() const;
  int tangent_dim() const;
  int exogenous_dim() const;
  int ambient_dim() const;
  std::string name() const;

  /// Sphere radius; throws for other kinds.
  double radius() const;
  /// Surface height model; throws for other kinds.
  const SurfaceModel& surface_model() const;

  std::span<const Manifold> components() const;
  int tangent_offset(std::size_t component) const;
  int exogenous_offset(std::size_t component) const;
  int ambient_offset(std::size_t component) const;

  /// Validates membership (tolerance 1e-9, relative to r on the sphere).
  ManifoldPoint point(Eigen::VectorXd ambient) const;
  /// Product point from one point per component.
  ManifoldPoint compose(std::span<const ManifoldPoint> parts) const;
  /// Zero / identity / north pole / surface above the origin.
  ManifoldPoint origin() const;
  bool contains(const Eigen::VectorXd& ambient, double tol = 1e-9) const;

  ManifoldPoint boxplus(const ManifoldPoint& x, const Eigen::VectorXd& delta) const;
  Eigen::VectorXd boxminus(const ManifoldPoint& y, const ManifoldPoint& x) const;
  ManifoldPoint oplus(const ManifoldPoint& x, const Eigen::VectorXd& delta_e) const;

  /// d/dd [((x_d [+] d) (+) v) [-] (x_d (+) v)] at d = 0; n x n.
  Eigen::MatrixXd gx(const ManifoldPoint& x_d, const Eigen::VectorXd& v) const;
  /// d/dd [(x_d (+) (v + d)) [-] (x_d (+) v)] at d = 0; n x l.
  Eigen::MatrixXd gf(const ManifoldPoint& x_d, const Eigen::VectorXd& v) const;

  bool operator==(const Manifold& other) const;

  struct Node;
  const Node* node_for_ops() const;

 private:
  explicit Manifold(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  void require_member(const ManifoldPoint& x, const char* what) const;

  std::shared_ptr<const Node> node_;
};

/// A value on a manifold: the descriptor plus ambient coordinates.
class ManifoldPoint {
 public:
  const Manifold& manifold() const { return manifold_; }
  const Eigen::VectorXd& coords() const { return coords_; }

  ManifoldPoint component(std::size_t i) const;

  /// Coordinates reshaped for the matrix-valued primitives.
  Eigen::Matrix3d rot3() const;
  Eigen::Matrix2d rot2() const;
  Eigen::Vector3d vec3() const;

 private:
  friend class Manifold;
  ManifoldPoint(Manifold m, Eigen::VectorXd coords)
      : manifold_(std::move(m)), coords_(std::move(coords)) {}

  Manifold manifold_;
  Eigen::VectorXd coords_;
};

// Convenience constructors for primitive points.
ManifoldPoint euclidean_point(const Eigen::VectorXd& v);
ManifoldPoint rot2_point(const Eigen::Matrix2d& R);
ManifoldPoint rot2_point(double angle);
ManifoldPoint rot3_point(const Eigen::Matrix3d& R);
ManifoldPoint sphere_point(const Eigen::Vector3d& x);
ManifoldPoint surface_point(const SurfaceModel& surface, const Eigen::Vector2d& xy);

/**
 * Orthonormal tangent basis of a sphere point. The natural axis e_i with the
 * largest |x_i| (ties to the smaller index) is rotated onto sign(x_i) x/r by
 * the minimal rotation; the images of the two remaining axes, in cyclic order,
 * form the columns, swapped if needed so that b1 x b2 = x/r.
 */
Eigen::Matrix<double, 3, 2> s2_basis(const Eigen::Vector3d& x);

}  // namespace mmpc
