#include "warpfill/model_spaces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "warpfill/error.hpp"

namespace warpfill {

namespace {

// Visits every integer vector in [-radius, radius]^dim.
template <class Visit>
void for_each_in_box(int dim, long radius, Visit&& visit) {
  Eigen::VectorXd m = Eigen::VectorXd::Constant(dim, static_cast<double>(-radius));
  if (dim == 0) return;
  while (true) {
    visit(m);
    int i = 0;
    while (i < dim && m[i] == static_cast<double>(radius)) {
      m[i] = static_cast<double>(-radius);
      ++i;
    }
    if (i == dim) return;
    m[i] += 1.0;
  }
}

constexpr long kMaxBoxRadius = 1000;

long box_radius(double length, double min_eig) {
  const double bound = std::floor(length / std::sqrt(min_eig) + 1e-9);
  if (bound > static_cast<double>(kMaxBoxRadius))
    throw Error(ErrorCode::InvalidInput, "lattice too skewed for box enumeration");
  return static_cast<long>(bound);
}

double hyperboloid_dot(const Eigen::Vector3d& x, const Eigen::Vector3d& y) {
  return x[0] * y[0] + x[1] * y[1] - x[2] * y[2];
}

// Point on the unit hyperboloid at the given distance from the apex, heading
// at angle theta.
Eigen::Vector3d hyperboloid_polar(double dist, double theta) {
  return {std::sinh(dist) * std::cos(theta), std::sinh(dist) * std::sin(theta), std::cosh(dist)};
}

double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

}  // namespace

// ---------------------------------------------------------------------------
// Lattices

LatticeTorus LatticeTorus::from_basis(const Eigen::MatrixXd& basis) {
  if (basis.rows() < 1 || basis.rows() != basis.cols())
    throw Error(ErrorCode::InvalidInput, "basis: expected a square matrix of size >= 1");
  if (!basis.allFinite()) throw Error(ErrorCode::InvalidInput, "basis: non-finite entry");
  LatticeTorus t;
  t.basis_ = basis;
  t.gram_ = basis * basis.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(t.gram_);
  t.min_eig_ = eig.eigenvalues().minCoeff();
  if (!(t.min_eig_ > 1e-14 * std::max(1.0, eig.eigenvalues().maxCoeff())))
    throw Error(ErrorCode::InvalidInput, "basis: matrix is singular");
  return t;
}

LatticeTorus LatticeTorus::from_gram(const Eigen::MatrixXd& gram) {
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::InvalidInput, "gram: not positive definite");
  Eigen::MatrixXd lower = llt.matrixL();
  return from_basis(lower);
}

LatticeTorus LatticeTorus::square(int dim, double side) {
  return from_basis(side * Eigen::MatrixXd::Identity(dim, dim));
}

double LatticeTorus::systole() const { return torus_systole(*this); }

double LatticeTorus::coefficient_norm(const Eigen::VectorXd& coeffs) const {
  return torus_distance(*this, basis_.transpose() * coeffs, Eigen::VectorXd::Zero(dim()));
}

nlohmann::json to_json(const LatticeTorus& torus) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < torus.dim(); ++i) {
    std::vector<double> row(torus.basis().cols());
    for (int j = 0; j < torus.basis().cols(); ++j) row[j] = torus.basis()(i, j);
    rows.push_back(row);
  }
  return {{"dim", torus.dim()}, {"basis", rows}};
}

LatticeTorus lattice_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("basis") || !doc["basis"].is_array())
    throw Error(ErrorCode::InvalidInput, "basis: missing or not an array");
  const auto& rows = doc["basis"];
  const int n = static_cast<int>(rows.size());
  if (doc.contains("dim") && doc["dim"].get<int>() != n)
    throw Error(ErrorCode::InvalidInput, "dim: does not match the number of basis rows");
  Eigen::MatrixXd basis(n, n);
  for (int i = 0; i < n; ++i) {
    if (!rows[i].is_array() || static_cast<int>(rows[i].size()) != n)
      throw Error(ErrorCode::InvalidInput, "basis[" + std::to_string(i) + "]: expected " + std::to_string(n) + " entries");
    for (int j = 0; j < n; ++j) basis(i, j) = rows[i][j].get<double>();
  }
  return LatticeTorus::from_basis(basis);
}

double torus_distance(const LatticeTorus& torus, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const int n = torus.dim();
  if (x.size() != n || y.size() != n) throw Error(ErrorCode::InvalidInput, "torus point has wrong dimension");
  const Eigen::MatrixXd& B = torus.basis();
  // Reduce the displacement to the parallelepiped, then enumerate translates
  // that could beat it.
  Eigen::VectorXd c = B.transpose().partialPivLu().solve(x - y);
  for (int i = 0; i < n; ++i) c[i] -= std::round(c[i]);
  const Eigen::VectorXd d = B.transpose() * c;
  double best = d.norm();
  const long radius = box_radius(2.0 * best, torus.min_gram_eigenvalue());
  for_each_in_box(n, radius, [&](const Eigen::VectorXd& m) {
    best = std::min(best, (d + B.transpose() * m).norm());
  });
  return best;
}

double torus_systole(const LatticeTorus& torus) {
  const int n = torus.dim();
  const Eigen::MatrixXd& G = torus.gram();
  double best = std::sqrt(G.diagonal().minCoeff());
  const long radius = box_radius(best, torus.min_gram_eigenvalue());
  for_each_in_box(n, radius, [&](const Eigen::VectorXd& m) {
    const double q = m.dot(G * m);
    if (!m.isZero()) best = std::min(best, std::sqrt(std::max(q, 0.0)));
  });
  return best;
}

// ---------------------------------------------------------------------------
// Hyperbolic plane

double halfplane_distance(std::complex<double> z, std::complex<double> w) {
  if (!(z.imag() > 0.0) || !(w.imag() > 0.0))
    throw Error(ErrorCode::Domain, "half-plane points need positive imaginary part");
  const double num = std::norm(z - w);
  // 2 asinh(|z - w| / (2 sqrt(Im z Im w))) is the cancellation-free form.
  return 2.0 * std::asinh(std::sqrt(num) / (2.0 * std::sqrt(z.imag() * w.imag())));
}

std::complex<double> strip_to_halfplane(double t, double a, double u) {
  return std::exp(u * a) * std::complex<double>(std::tanh(t), 1.0 / std::cosh(t));
}

// ---------------------------------------------------------------------------
// Comparison triangles

double model_distance(double kappa, const Eigen::Vector3d& x, const Eigen::Vector3d& y) {
  if (kappa == 0.0) return (x - y).norm();
  const double scale = std::sqrt(-kappa);
  // Stable form: |x - y|_L^2 = 2 (cosh d - 1) = 4 sinh^2(d / 2).
  const Eigen::Vector3d diff = x - y;
  const double q = std::max(0.0, hyperboloid_dot(diff, diff));
  return 2.0 * std::asinh(0.5 * std::sqrt(q)) / scale;
}

ComparisonTriangle comparison_triangle(double kappa, double a, double b, double c) {
  if (!(kappa <= 0.0)) throw Error(ErrorCode::InvalidInput, "kappa must be <= 0");
  if (!(a > 0.0 && b > 0.0 && c > 0.0)) throw Error(ErrorCode::Degenerate, "side lengths must be positive");
  const double tol = 1e-12 * std::max({1.0, a, b, c});
  if (a > b + c + tol || b > a + c + tol || c > a + b + tol)
    throw Error(ErrorCode::Degenerate, "side lengths violate the triangle inequality");
  ComparisonTriangle tri;
  tri.kappa = kappa;
  tri.sides = {a, b, c};
  // angle at vertex i lies between side i-1 (ending there) and side i.
  auto angle_between = [&](double s1, double s2, double opposite) {
    if (kappa == 0.0) return std::acos(clamp_unit((s1 * s1 + s2 * s2 - opposite * opposite) / (2.0 * s1 * s2)));
    const double k = std::sqrt(-kappa);
    const double x = k * s1, y = k * s2, z = k * opposite;
    // cosh z = cosh x cosh y - sinh x sinh y cos(angle), written with
    // cosh z - cosh(x - y) to avoid cancellation for thin triangles.
    const double num = std::cosh(z) - std::cosh(x - y);
    const double den = std::sinh(x) * std::sinh(y);
    return std::acos(clamp_unit(1.0 - num / den));
  };
  tri.angles[1] = angle_between(a, b, c);
  tri.angles[2] = angle_between(b, c, a);
  tri.angles[0] = angle_between(c, a, b);

  // Vertex 1 at the origin, vertex 0 along the x-axis, vertex 2 at angle angles[1].
  if (kappa == 0.0) {
    tri.vertices[1] = Eigen::Vector3d::Zero();
    tri.vertices[0] = Eigen::Vector3d(a, 0.0, 0.0);
    tri.vertices[2] = Eigen::Vector3d(b * std::cos(tri.angles[1]), b * std::sin(tri.angles[1]), 0.0);
  } else {
    const double k = std::sqrt(-kappa);
    tri.vertices[1] = Eigen::Vector3d(0.0, 0.0, 1.0);
    tri.vertices[0] = hyperboloid_polar(k * a, 0.0);
    tri.vertices[2] = hyperboloid_polar(k * b, tri.angles[1]);
  }
  return tri;
}

Eigen::Vector3d triangle_point(const ComparisonTriangle& tri, int side, double arclength) {
  if (side < 0 || side > 2) throw Error(ErrorCode::OutOfRange, "side index must be 0, 1 or 2");
  const double len = tri.sides[side];
  const double slack = 1e-12 * std::max(1.0, len);
  if (arclength < -slack || arclength > len + slack)
    throw Error(ErrorCode::OutOfRange, "arclength outside [0, side length]");
  arclength = std::clamp(arclength, 0.0, len);
  const Eigen::Vector3d& p = tri.vertices[side];
  const Eigen::Vector3d& q = tri.vertices[(side + 1) % 3];
  if (tri.kappa == 0.0) return p + (arclength / len) * (q - p);
  const double k = std::sqrt(-tri.kappa);
  // Unit tangent at p toward q, in the Minkowski sense.
  const double cosh_d = -hyperboloid_dot(p, q);
  const Eigen::Vector3d raw = q - cosh_d * p;
  const double norm = std::sqrt(std::max(0.0, hyperboloid_dot(raw, raw)));
  if (norm == 0.0) return p;
  const double s = k * arclength;
  return std::cosh(s) * p + std::sinh(s) * (raw / norm);
}

// ---------------------------------------------------------------------------
// Spherical join

double spherical_join_distance(const JoinPoint& p, const JoinPoint& q, const PointMetric& dA, const PointMetric& dB) {
  constexpr double pi = std::numbers::pi;
  const double ca = std::cos(p.phi) * std::cos(q.phi);
  const double sb = std::sin(p.phi) * std::sin(q.phi);
  // Skip a factor that the quotient makes irrelevant (its point may be absent).
  const double da = ca != 0.0 ? std::min(pi, dA(p.a_point, q.a_point)) : 0.0;
  const double db = sb != 0.0 ? std::min(pi, dB(p.b_point, q.b_point)) : 0.0;
  return std::acos(clamp_unit(ca * std::cos(da) + sb * std::cos(db)));
}

bool join_points_equal(const JoinPoint& p, const JoinPoint& q, double tol) {
  if (std::abs(p.phi - q.phi) > tol) return false;
  auto close = [tol](const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (std::abs(x[i] - y[i]) > tol) return false;
    return true;
  };
  const bool a_matters = std::abs(p.phi - 0.5 * std::numbers::pi) > tol;
  const bool b_matters = std::abs(p.phi) > tol;
  return (!a_matters || close(p.a_point, q.a_point)) && (!b_matters || close(p.b_point, q.b_point));
}

PointMetric circle_metric(double circumference) {
  return [circumference](const std::vector<double>& x, const std::vector<double>& y) {
    const double d = std::fmod(std::abs(x.at(0) - y.at(0)), circumference);
    return std::min(d, circumference - d);
  };
}

}  // namespace warpfill
