#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "warpfill/warp_engine.hpp"
#include "warpfill/warp_functions.hpp"

namespace warpfill {

struct SectionalTerm {
  std::string label;
  double value = 0.0;
  bool applicable = false;
};

/// Curvature terms of a doubly warped product I x_{f1} A1 x_{f2} A2 at t.
/// Sectional curvatures of 2-planes are convex combinations of the
/// applicable terms, so lower/upper bound them.
struct SectionalTerms {
  double t = 0.0;
  std::vector<SectionalTerm> terms;
  double lower = 0.0;
  double upper = 0.0;
};

/// Throws NONPOSITIVE_WARP.
SectionalTerms sectional_terms(const FunctionHandle& f1, const FunctionHandle& f2, int dim1, int dim2, double t);

/// Sectional curvature of the coordinate plane (axis_a, axis_b) from finite
/// differences of the chart metric. Axes index (r, e_1..e_k, theta_1..theta_d).
/// Throws SINGULAR_POINT where the torus warp is below 1e-8.
double fd_sectional(const WarpedSpace& space, const WPoint& point, std::array<int, 2> plane);

struct FKViolation {
  double a = 0.0;
  double b = 0.0;
  double t = 0.0;
  double deficit = 0.0;
};

struct FKReport {
  double K = 0.0;
  double window = 0.0;
  double margin = 0.0;
  std::vector<FKViolation> violations;  // first 1000 recorded
  std::size_t violation_count = 0;
  double max_deficit = 0.0;
  bool passed = true;
};

/// Barrier-sense check of u'' + K u >= 0 on sampled (t, u) pairs: u must stay
/// below the solution of y'' + K y = 0 through every sample pair at most
/// window apart. Throws WINDOW_TOO_SMALL.
FKReport fk_convexity(const std::vector<std::pair<double, double>>& samples, double K, double window,
                      double margin = 1e-9);

nlohmann::json to_json(const FKReport& report);

struct ComparisonSample {
  int triangle = 0;
  int side_a = 0;
  int side_b = 0;
  double s_a = 0.0;
  double s_b = 0.0;
  double d_space = 0.0;
  double d_model = 0.0;

  double violation() const { return d_space - d_model; }
};

struct ComparisonReport {
  double kappa = 0.0;
  double tolerance = 2e-4;
  int triangles_tested = 0;
  double max_violation = 0.0;
  std::optional<ComparisonSample> worst;
  bool passed = true;
  std::vector<std::array<double, 3>> triangle_sides;
  std::vector<ComparisonSample> samples;
};

using Triangle = std::array<WPoint, 3>;

/// Compares distances between points on two sides of the geodesic triangle
/// with the same pairs in its comparison triangle of curvature kappa.
/// Throws SOLVER_FAILURE.
ComparisonReport cat_test(const WarpedSpace& space, const Triangle& vertices, double kappa, int param_samples,
                          std::uint64_t seed, double tolerance = 2e-4, const SolverOptions& options = {});

/// cat_test over many triangles, run in parallel and merged in input order.
ComparisonReport cat_campaign(const WarpedSpace& space, const std::vector<Triangle>& triangles, double kappa,
                              int samples_per_triangle, std::uint64_t seed, double tolerance = 2e-4,
                              const SolverOptions& options = {});

/// Same samples judged against the comparison triangles of another kappa.
ComparisonReport reevaluate(const ComparisonReport& report, double kappa);

/// Random triangles with vertices uniform in the box [lo, hi] (per chart
/// coordinate) and every side length in [min_side, max_side].
std::vector<Triangle> sample_triangles(const WarpedSpace& space, const std::vector<double>& lo,
                                       const std::vector<double>& hi, int count, std::uint64_t seed,
                                       double min_side = 0.1, double max_side = 1e300,
                                       const SolverOptions& options = {});

nlohmann::json to_json(const ComparisonReport& report);

struct SpotCheck {
  double r = 0.0;
  std::array<int, 2> plane{};
  double fd = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool ok = false;
};

struct CurvatureScan {
  std::vector<SectionalTerms> rows;
  double delta = 0.0;
  double kappa_empirical = 0.0;  // inf of -upper over [delta, r_max]
  std::vector<SpotCheck> spot_checks;
  bool passed = false;
};

/// Tabulates sectional_terms on grid + 1 points of the interval and
/// cross-checks fd_sectional at random grid points.
CurvatureScan curvature_scan(const WarpedSpace& space, int grid, std::uint64_t seed, int spot_checks = 10);

nlohmann::json to_json(const CurvatureScan& scan);
std::string to_csv(const CurvatureScan& scan);

}  // namespace warpfill
