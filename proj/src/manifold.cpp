#include "mmpc/manifold.hpp"

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>

#include "mmpc/errors.hpp"
#include "mmpc/rotation.hpp"

namespace mmpc {

struct Manifold::Node {
  ManifoldKind kind = ManifoldKind::Euclidean;
  int n = 0;
  int l = 0;
  int ambient = 0;
  double radius = 1.0;
  SurfaceModel surface;
  std::vector<Manifold> components;
  std::vector<int> tangent_offsets;
  std::vector<int> exo_offsets;
  std::vector<int> ambient_offsets;
};

namespace {

using ConstVec = Eigen::Ref<const Eigen::VectorXd>;
using Vec = Eigen::Ref<Eigen::VectorXd>;
using Mat = Eigen::Ref<Eigen::MatrixXd>;
using Node = Manifold::Node;

Eigen::Matrix3d as_rot3(ConstVec c) { return Eigen::Map<const Eigen::Matrix3d>(c.data()); }
Eigen::Matrix2d as_rot2(ConstVec c) { return Eigen::Map<const Eigen::Matrix2d>(c.data()); }

void store(Vec out, const Eigen::Matrix3d& R) {
  out = Eigen::Map<const Eigen::Matrix<double, 9, 1>>(R.data());
}
void store(Vec out, const Eigen::Matrix2d& R) {
  out = Eigen::Map<const Eigen::Matrix<double, 4, 1>>(R.data());
}

// Minimal rotation taking unit vector a onto unit vector b.
Eigen::Matrix3d align(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const Eigen::Vector3d axis = a.cross(b);
  const double s = axis.norm();
  const double angle = std::atan2(s, a.dot(b));
  if (s < 1e-12) return so3_exp(axis);
  return so3_exp(axis * (angle / s));
}

// Rotation vector (in R^3) carrying x onto y along the great circle.
Eigen::Vector3d sphere_rotation_vector(const Eigen::Vector3d& x, const Eigen::Vector3d& y,
                                       double r) {
  const Eigen::Vector3d c = x.cross(y);
  const double s = c.norm();
  const double theta = std::atan2(s, x.dot(y));
  if (theta > std::numbers::pi - kCutLocusMargin) {
    throw OutOfChartError("sphere boxminus: points are antipodal");
  }
  if (s < 1e-12 * r * r) return c / (r * r);
  return c * (theta / s);
}

void boxplus_raw(const Node& m, ConstVec x, ConstVec d, Vec out) {
  switch (m.kind) {
    case ManifoldKind::Euclidean:
      out = x + d;
      return;
    case ManifoldKind::Rot2:
      store(out, Eigen::Matrix2d(as_rot2(x) * so2_exp(d(0))));
      return;
    case ManifoldKind::Rot3: {
      const Eigen::Vector3d delta = d;
      if (delta.norm() >= std::numbers::pi) {
        throw OutOfChartError("SO(3) boxplus: perturbation norm must be below pi");
      }
      store(out, Eigen::Matrix3d(as_rot3(x) * so3_exp(delta)));
      return;
    }
    case ManifoldKind::Sphere2: {
      const Eigen::Vector3d p = x;
      out = so3_exp(s2_basis(p) * Eigen::Vector2d(d)) * p;
      return;
    }
    case ManifoldKind::Surface2D: {
      const Eigen::Vector2d xy = x.head<2>() + d;
      out << xy, m.surface.height(xy);
      return;
    }
    case ManifoldKind::Product:
      for (std::size_t i = 0; i < m.components.size(); ++i) {
        const Node& c = *m.components[i].node_for_ops();
        boxplus_raw(c, x.segment(m.ambient_offsets[i], c.ambient),
                    d.segment(m.tangent_offsets[i], c.n),
                    out.segment(m.ambient_offsets[i], c.ambient));
      }
      return;
  }
}

void boxminus_raw(const Node& m, ConstVec y, ConstVec x, Vec out) {
  switch (m.kind) {
    case ManifoldKind::Euclidean:
      out = y - x;
      return;
    case ManifoldKind::Rot2:
      out(0) = so2_log(as_rot2(x).transpose() * as_rot2(y));
      return;
    case ManifoldKind::Rot3:
      out = so3_log(as_rot3(x).transpose() * as_rot3(y));
      return;
    case ManifoldKind::Sphere2: {
      const Eigen::Vector3d px = x, py = y;
      out = s2_basis(px).transpose() * sphere_rotation_vector(px, py, m.radius);
      return;
    }
    case ManifoldKind::Surface2D:
      out = (y - x).head<2>();
      return;
    case ManifoldKind::Product:
      for (std::size_t i = 0; i < m.components.size(); ++i) {
        const Node& c = *m.components[i].node_for_ops();
        boxminus_raw(c, y.segment(m.ambient_offsets[i], c.ambient),
                     x.segment(m.ambient_offsets[i], c.ambient),
                     out.segment(m.tangent_offsets[i], c.n));
      }
      return;
  }
}

void oplus_raw(const Node& m, ConstVec x, ConstVec v, Vec out) {
  switch (m.kind) {
    case ManifoldKind::Euclidean:
    case ManifoldKind::Surface2D:
      boxplus_raw(m, x, v, out);
      return;
    case ManifoldKind::Rot2:
      store(out, Eigen::Matrix2d(as_rot2(x) * so2_exp(v(0))));
      return;
    case ManifoldKind::Rot3:
      store(out, Eigen::Matrix3d(as_rot3(x) * so3_exp(v)));
      return;
    case ManifoldKind::Sphere2:
      out = so3_exp(v) * Eigen::Vector3d(x);
      return;
    case ManifoldKind::Product:
      for (std::size_t i = 0; i < m.components.size(); ++i) {
        const Node& c = *m.components[i].node_for_ops();
        oplus_raw(c, x.segment(m.ambient_offsets[i], c.ambient),
                  v.segment(m.exo_offsets[i], c.l), out.segment(m.ambient_offsets[i], c.ambient));
      }
      return;
  }
}

// Shared head of the sphere G blocks: -(1/r^2) B(x (+) v)^T Exp(v) [x]^2.
Eigen::Matrix<double, 2, 3> sphere_g_head(const Eigen::Vector3d& x, const Eigen::Vector3d& v,
                                          double r) {
  const Eigen::Matrix3d Ev = so3_exp(v);
  const Eigen::Matrix3d X = skew(x);
  return -(1.0 / (r * r)) * s2_basis(Ev * x).transpose() * Ev * X * X;
}

void gx_raw(const Node& m, ConstVec x, ConstVec v, Mat out) {
  switch (m.kind) {
    case ManifoldKind::Euclidean:
    case ManifoldKind::Rot2:
    case ManifoldKind::Surface2D:
      out.setIdentity();
      return;
    case ManifoldKind::Rot3:
      out = so3_exp(-Eigen::Vector3d(v));
      return;
    case ManifoldKind::Sphere2: {
      const Eigen::Vector3d p = x;
      out = sphere_g_head(p, v, m.radius) * s2_basis(p);
      return;
    }
    case ManifoldKind::Product:
      out.setZero();
      for (std::size_t i = 0; i < m.components.size(); ++i) {
        const Node& c = *m.components[i].node_for_ops();
        gx_raw(c, x.segment(m.ambient_offsets[i], c.ambient), v.segment(m.exo_offsets[i], c.l),
               out.block(m.tangent_offsets[i], m.tangent_offsets[i], c.n, c.n));
      }
      return;
  }
}

void gf_raw(const Node& m, ConstVec x, ConstVec v, Mat out) {
  switch (m.kind) {
    case ManifoldKind::Euclidean:
    case ManifoldKind::Rot2:
    case ManifoldKind::Surface2D:
      out.setIdentity();
      return;
    case ManifoldKind::Rot3:
      out = a_matrix(v).transpose();
      return;
    case ManifoldKind::Sphere2: {
      const Eigen::Vector3d p = x, w = v;
      out = sphere_g_head(p, w, m.radius) * a_matrix(w).transpose();
      return;
    }
    case ManifoldKind::Product:
      out.setZero();
      for (std::size_t i = 0; i < m.components.size(); ++i) {
        const Node& c = *m.components[i].node_for_ops();
        gf_raw(c, x.segment(m.ambient_offsets[i], c.ambient), v.segment(m.exo_offsets[i], c.l),
               out.block(m.tangent_offsets[i], m.exo_offsets[i], c.n, c.l));
      }
      return;
  }
}

bool contains_raw(const Node& m, ConstVec x, double tol) {
  if (!x.allFinite()) return false;
  switch (m.kind) {
    case ManifoldKind::Euclidean:
      return true;
    case ManifoldKind::Rot2: {
      const Eigen::Matrix2d R = as_rot2(x);
      return (R.transpose() * R - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < tol &&
             R.determinant() > 0.0;
    }
    case ManifoldKind::Rot3: {
      const Eigen::Matrix3d R = as_rot3(x);
      return (R.transpose() * R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < tol &&
             R.determinant() > 0.0;
    }
    case ManifoldKind::Sphere2:
      return std::abs(x.norm() - m.radius) < tol * m.radius;
    case ManifoldKind::Surface2D:
      return std::abs(x(2) - m.surface.height(x(0), x(1))) < tol;
    case ManifoldKind::Product:
      for (std::size_t i = 0; i < m.components.size(); ++i) {
        const Node& c = *m.components[i].node_for_ops();
        if (!contains_raw(c, x.segment(m.ambient_offsets[i], c.ambient), tol)) return false;
      }
      return true;
  }
  return false;
}

bool same(const Node& a, const Node& b) {
  if (&a == &b) return true;
  if (a.kind != b.kind || a.n != b.n || a.l != b.l || a.ambient != b.ambient) return false;
  switch (a.kind) {
    case ManifoldKind::Sphere2:
      // Same tolerance as membership, so sphere_point(r * u) lands on sphere2(r).
      return std::abs(a.radius - b.radius) <= 1e-9 * std::max(a.radius, b.radius);
    case ManifoldKind::Surface2D:
      return a.surface == b.surface;
    case ManifoldKind::Product:
      if (a.components.size() != b.components.size()) return false;
      for (std::size_t i = 0; i < a.components.size(); ++i) {
        if (!(a.components[i] == b.components[i])) return false;
      }
      return true;
    default:
      return true;
  }
}

void require_size(Eigen::Index got, int want, const char* what) {
  if (got != want) {
    std::ostringstream msg;
    msg << what << ": expected length " << want << ", got " << got;
    throw ContractViolation(msg.str());
  }
}

}  // namespace

// Internal accessor used by the recursive helpers above.
const Manifold::Node* Manifold::node_for_ops() const { return node_.get(); }

Manifold Manifold::euclidean(int dim) {
  if (dim < 1) throw ContractViolation("euclidean: dimension must be positive");
  auto n = std::make_shared<Node>();
  n->kind = ManifoldKind::Euclidean;
  n->n = n->l = n->ambient = dim;
  return Manifold(std::move(n));
}

Manifold Manifold::rot2() {
  auto n = std::make_shared<Node>();
  n->kind = ManifoldKind::Rot2;
  n->n = n->l = 1;
  n->ambient = 4;
  return Manifold(std::move(n));
}

Manifold Manifold::rot3() {
  auto n = std::make_shared<Node>();
  n->kind = ManifoldKind::Rot3;
  n->n = n->l = 3;
  n->ambient = 9;
  return Manifold(std::move(n));
}

Manifold Manifold::sphere2(double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw ContractViolation("sphere2: radius must be positive");
  }
  auto n = std::make_shared<Node>();
  n->kind = ManifoldKind::Sphere2;
  n->n = 2;
  n->l = 3;
  n->ambient = 3;
  n->radius = radius;
  return Manifold(std::move(n));
}

Manifold Manifold::surface(const SurfaceModel& surface) {
  auto n = std::make_shared<Node>();
  n->kind = ManifoldKind::Surface2D;
  n->n = n->l = 2;
  n->ambient = 3;
  n->surface = surface;
  return Manifold(std::move(n));
}

Manifold Manifold::product(std::vector<Manifold> components) {
  if (components.empty()) throw ContractViolation("product: empty component list");
  auto n = std::make_shared<Node>();
  n->kind = ManifoldKind::Product;
  for (const auto& c : components) {
    n->tangent_offsets.push_back(n->n);
    n->exo_offsets.push_back(n->l);
    n->ambient_offsets.push_back(n->ambient);
    n->n += c.tangent_dim();
    n->l += c.exogenous_dim();
    n->ambient += c.ambient_dim();
  }
  n->components = std::move(components);
  return Manifold(std::move(n));
}

ManifoldKind Manifold::kind() const { return node_->kind; }
int Manifold::tangent_dim() const { return node_->n; }
int Manifold::exogenous_dim() const { return node_->l; }
int Manifold::ambient_dim() const { return node_->ambient; }

std::string Manifold::name() const {
  switch (node_->kind) {
    case ManifoldKind::Euclidean:
      return "R" + std::to_string(node_->n);
    case ManifoldKind::Rot2:
      return "SO2";
    case ManifoldKind::Rot3:
      return "SO3";
    case ManifoldKind::Sphere2: {
      std::ostringstream s;
      s << "S2(r=" << node_->radius << ")";
      return s.str();
    }
    case ManifoldKind::Surface2D:
      return "Surface";
    case ManifoldKind::Product: {
      std::string out;
      for (std::size_t i = 0; i < node_->components.size(); ++i) {
        if (i) out += " x ";
        out += node_->components[i].name();
      }
      return out;
    }
  }
  return "?";
}

double Manifold::radius() const {
  if (node_->kind != ManifoldKind::Sphere2) throw ContractViolation("radius: not a sphere");
  return node_->radius;
}

const SurfaceModel& Manifold::surface_model() const {
  if (node_->kind != ManifoldKind::Surface2D) {
    throw ContractViolation("surface_model: not a surface");
  }
  return node_->surface;
}

std::span<const Manifold> Manifold::components() const { return node_->components; }

int Manifold::tangent_offset(std::size_t i) const { return node_->tangent_offsets.at(i); }
int Manifold::exogenous_offset(std::size_t i) const { return node_->exo_offsets.at(i); }
int Manifold::ambient_offset(std::size_t i) const { return node_->ambient_offsets.at(i); }

bool Manifold::contains(const Eigen::VectorXd& ambient, double tol) const {
  return ambient.size() == node_->ambient && contains_raw(*node_, ambient, tol);
}

ManifoldPoint Manifold::point(Eigen::VectorXd ambient) const {
  require_size(ambient.size(), node_->ambient, "Manifold::point");
  if (!contains_raw(*node_, ambient, 1e-9)) {
    throw ContractViolation("Manifold::point: coordinates are not on " + name());
  }
  return ManifoldPoint(*this, std::move(ambient));
}

ManifoldPoint Manifold::compose(std::span<const ManifoldPoint> parts) const {
  if (node_->kind != ManifoldKind::Product || parts.size() != node_->components.size()) {
    throw ContractViolation("Manifold::compose: component count mismatch");
  }
  Eigen::VectorXd coords(node_->ambient);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (!(parts[i].manifold() == node_->components[i])) {
      throw ContractViolation("Manifold::compose: component manifold mismatch");
    }
    coords.segment(node_->ambient_offsets[i], parts[i].coords().size()) = parts[i].coords();
  }
  return ManifoldPoint(*this, std::move(coords));
}

ManifoldPoint Manifold::origin() const {
  Eigen::VectorXd coords(node_->ambient);
  switch (node_->kind) {
    case ManifoldKind::Euclidean:
      coords.setZero();
      break;
    case ManifoldKind::Rot2:
      coords << 1.0, 0.0, 0.0, 1.0;
      break;
    case ManifoldKind::Rot3:
      store(coords, Eigen::Matrix3d(Eigen::Matrix3d::Identity()));
      break;
    case ManifoldKind::Sphere2:
      coords << 0.0, 0.0, node_->radius;
      break;
    case ManifoldKind::Surface2D:
      coords << 0.0, 0.0, node_->surface.height(0.0, 0.0);
      break;
    case ManifoldKind::Product: {
      std::vector<ManifoldPoint> parts;
      for (const auto& c : node_->components) parts.push_back(c.origin());
      return compose(parts);
    }
  }
  return ManifoldPoint(*this, std::move(coords));
}

void Manifold::require_member(const ManifoldPoint& x, const char* what) const {
  if (x.coords().size() != node_->ambient ||
      (x.manifold().node_ != node_ && !same(*x.manifold().node_, *node_))) {
    throw ContractViolation(std::string(what) + ": point does not belong to " + name());
  }
}

ManifoldPoint Manifold::boxplus(const ManifoldPoint& x, const Eigen::VectorXd& delta) const {
  require_member(x, "boxplus");
  require_size(delta.size(), node_->n, "boxplus");
  Eigen::VectorXd out(node_->ambient);
  boxplus_raw(*node_, x.coords(), delta, out);
  return ManifoldPoint(*this, std::move(out));
}

Eigen::VectorXd Manifold::boxminus(const ManifoldPoint& y, const ManifoldPoint& x) const {
  require_member(x, "boxminus");
  require_member(y, "boxminus");
  Eigen::VectorXd out(node_->n);
  boxminus_raw(*node_, y.coords(), x.coords(), out);
  return out;
}

ManifoldPoint Manifold::oplus(const ManifoldPoint& x, const Eigen::VectorXd& delta_e) const {
  require_member(x, "oplus");
  require_size(delta_e.size(), node_->l, "oplus");
  Eigen::VectorXd out(node_->ambient);
  oplus_raw(*node_, x.coords(), delta_e, out);
  return ManifoldPoint(*this, std::move(out));
}

Eigen::MatrixXd Manifold::gx(const ManifoldPoint& x_d, const Eigen::VectorXd& v) const {
  require_member(x_d, "gx");
  require_size(v.size(), node_->l, "gx");
  Eigen::MatrixXd out(node_->n, node_->n);
  gx_raw(*node_, x_d.coords(), v, out);
  return out;
}

Eigen::MatrixXd Manifold::gf(const ManifoldPoint& x_d, const Eigen::VectorXd& v) const {
  require_member(x_d, "gf");
  require_size(v.size(), node_->l, "gf");
  Eigen::MatrixXd out(node_->n, node_->l);
  gf_raw(*node_, x_d.coords(), v, out);
  return out;
}

bool Manifold::operator==(const Manifold& other) const { return same(*node_, *other.node_); }

ManifoldPoint ManifoldPoint::component(std::size_t i) const {
  const auto comps = manifold_.components();
  if (i >= comps.size()) throw ContractViolation("component: index out of range");
  const Manifold& c = comps[i];
  return ManifoldPoint(c, coords_.segment(manifold_.ambient_offset(i), c.ambient_dim()));
}

Eigen::Matrix3d ManifoldPoint::rot3() const {
  if (manifold_.kind() != ManifoldKind::Rot3) throw ContractViolation("rot3: not an SO(3) point");
  return as_rot3(coords_);
}

Eigen::Matrix2d ManifoldPoint::rot2() const {
  if (manifold_.kind() != ManifoldKind::Rot2) throw ContractViolation("rot2: not an SO(2) point");
  return as_rot2(coords_);
}

Eigen::Vector3d ManifoldPoint::vec3() const {
  if (coords_.size() != 3) throw ContractViolation("vec3: point is not 3-dimensional");
  return coords_;
}

ManifoldPoint euclidean_point(const Eigen::VectorXd& v) {
  return Manifold::euclidean(static_cast<int>(v.size())).point(v);
}

ManifoldPoint rot2_point(const Eigen::Matrix2d& R) {
  return Manifold::rot2().point(Eigen::Map<const Eigen::Vector4d>(R.data()));
}

ManifoldPoint rot2_point(double angle) { return rot2_point(so2_exp(angle)); }

ManifoldPoint rot3_point(const Eigen::Matrix3d& R) {
  return Manifold::rot3().point(Eigen::Map<const Eigen::Matrix<double, 9, 1>>(R.data()));
}

ManifoldPoint sphere_point(const Eigen::Vector3d& x) {
  return Manifold::sphere2(x.norm()).point(x);
}

ManifoldPoint surface_point(const SurfaceModel& surface, const Eigen::Vector2d& xy) {
  return Manifold::surface(surface).point(Eigen::Vector3d(xy.x(), xy.y(), surface.height(xy)));
}

Eigen::Matrix<double, 3, 2> s2_basis(const Eigen::Vector3d& x) {
  const double r = x.norm();
  if (!(r > 0.0)) throw ContractViolation("s2_basis: zero vector");
  const Eigen::Vector3d unit = x / r;
  int i = 0;
  for (int j = 1; j < 3; ++j) {
    if (std::abs(unit(j)) > std::abs(unit(i))) i = j;
  }
  const double sign = unit(i) < 0.0 ? -1.0 : 1.0;
  const Eigen::Matrix3d rot = align(sign * Eigen::Vector3d::Unit(i), unit);
  const int j = (i + 1) % 3;
  const int k = (i + 2) % 3;
  Eigen::Matrix<double, 3, 2> B;
  if (sign > 0.0) {
    B << rot.col(j), rot.col(k);
  } else {
    B << rot.col(k), rot.col(j);
  }
  return B;
}

}  // namespace mmpc
