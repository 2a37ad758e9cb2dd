#pragma once

#include <array>
#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace warpfill {

/// Flat torus R^n / L. Rows of the basis are the lattice generators.
class LatticeTorus {
 public:
  LatticeTorus() = default;
  static LatticeTorus from_basis(const Eigen::MatrixXd& basis);
  /// Any lattice with this Gram matrix (basis from its Cholesky factor).
  static LatticeTorus from_gram(const Eigen::MatrixXd& gram);
  static LatticeTorus square(int dim, double side);
  static LatticeTorus circle(double circumference) { return square(1, circumference); }

  int dim() const { return static_cast<int>(basis_.rows()); }
  const Eigen::MatrixXd& basis() const { return basis_; }
  const Eigen::MatrixXd& gram() const { return gram_; }
  double min_gram_eigenvalue() const { return min_eig_; }

  /// Length of the shortest nonzero lattice vector.
  double systole() const;
  double injectivity_radius() const { return 0.5 * systole(); }

  /// Torus distance of a displacement given in lattice coefficients.
  double coefficient_norm(const Eigen::VectorXd& coeffs) const;

 private:
  Eigen::MatrixXd basis_;
  Eigen::MatrixXd gram_;
  double min_eig_ = 0.0;
};

nlohmann::json to_json(const LatticeTorus& torus);
LatticeTorus lattice_from_json(const nlohmann::json& doc);

/// Minimum over lattice translates v of |x - y + v|; points in Euclidean
/// coordinates.
double torus_distance(const LatticeTorus& torus, const Eigen::VectorXd& x, const Eigen::VectorXd& y);
double torus_systole(const LatticeTorus& torus);

// Hyperbolic upper half-plane.
double halfplane_distance(std::complex<double> z, std::complex<double> w);

/// e^(u a) (tanh t + i sech t)
std::complex<double> strip_to_halfplane(double t, double a, double u);

/// Triangle in the model plane of curvature kappa <= 0. Side i joins vertex i
/// to vertex i+1 (mod 3); angles[i] is the interior angle at vertex i. Flat
/// vertices use (x, y, 0); hyperbolic vertices lie on the unit hyperboloid
/// and distances there are divided by sqrt(-kappa).
struct ComparisonTriangle {
  double kappa = 0.0;
  std::array<double, 3> sides{};
  std::array<Eigen::Vector3d, 3> vertices;
  std::array<double, 3> angles{};
};

ComparisonTriangle comparison_triangle(double kappa, double a, double b, double c);
Eigen::Vector3d triangle_point(const ComparisonTriangle& tri, int side, double arclength);
double model_distance(double kappa, const Eigen::Vector3d& x, const Eigen::Vector3d& y);

/// Point of a spherical join A * B.
struct JoinPoint {
  double phi = 0.0;
  std::vector<double> a_point;
  std::vector<double> b_point;
};

using PointMetric = std::function<double(const std::vector<double>&, const std::vector<double>&)>;

double spherical_join_distance(const JoinPoint& p, const JoinPoint& q, const PointMetric& dA, const PointMetric& dB);

/// Equality in the join: the B coordinate is ignored at phi = 0 and the A
/// coordinate at phi = pi/2.
bool join_points_equal(const JoinPoint& p, const JoinPoint& q, double tol = 1e-12);

/// Arc-length metric of a circle of the given circumference; points are
/// one-element vectors holding the arc-length coordinate.
PointMetric circle_metric(double circumference);

}  // namespace warpfill
