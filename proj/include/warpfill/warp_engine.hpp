#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "warpfill/model_spaces.hpp"
#include "warpfill/warp_functions.hpp"

namespace warpfill {

/// Warping function of one fiber factor: an analytic form or a built
/// piecewise function. Analytic forms are scale * base(rate * (r - shift)):
/// sinh, cosh, exp_shift (exp), linear_r (identity) and constant (1).
class Warp {
 public:
  enum class Kind { Sinh, Cosh, ExpShift, LinearR, Constant, Piecewise };

  static Warp sinh() { return analytic(Kind::Sinh); }
  static Warp cosh() { return analytic(Kind::Cosh); }
  static Warp exp_shift(double shift, double rate = 1.0);
  static Warp linear_r() { return analytic(Kind::LinearR); }
  static Warp constant(double value);
  static Warp piecewise(SmoothWarpFunction fn);
  static Warp analytic(Kind kind, double shift = 0.0, double rate = 1.0, double scale = 1.0);

  Kind kind() const { return kind_; }
  double operator()(double r, int order = 0) const;
  const SmoothWarpFunction* piecewise_function() const { return fn_.get(); }
  FunctionHandle handle() const;

  nlohmann::json to_json() const;
  static Warp from_json(const nlohmann::json& doc, const std::string& field);

 private:
  Kind kind_ = Kind::Constant;
  double shift_ = 0.0;
  double rate_ = 1.0;
  double scale_ = 1.0;
  std::shared_ptr<const SmoothWarpFunction> fn_;
};

/// [r_min, r_max] x_g E^k x_f T
struct WarpedSpace {
  double r_min = 0.0;
  double r_max = 1.0;
  int euclid_dim = 0;
  Warp warp_g = Warp::constant(1.0);
  std::optional<LatticeTorus> torus;
  Warp warp_f = Warp::constant(1.0);
  bool singular_at_zero = false;

  int torus_dim() const { return torus ? torus->dim() : 0; }
  int chart_dim() const { return 1 + euclid_dim + torus_dim(); }

  /// Checks positivity of the warps and sets singular_at_zero.
  static WarpedSpace make(double r_min, double r_max, int euclid_dim, Warp warp_g, std::optional<LatticeTorus> torus,
                          Warp warp_f);
};

nlohmann::json to_json(const WarpedSpace& space);
WarpedSpace warped_space_from_json(const nlohmann::json& doc);

/// R x_{e^(r/scale)} E^1 on [-r_bound, r_bound].
WarpedSpace hyperbolic_plane_space(double scale = 1.0, double r_bound = 10.0);
/// R x_{e^r} E^k, no torus.
WarpedSpace hyperbolic_space(int euclid_dim, double r_bound = 10.0);
/// Flat chart R x_1 E^1 on [-r_bound, r_bound].
WarpedSpace flat_plane_space(double r_bound = 10.0);
/// [0, r_max] x_cosh E^k x_sinh T.
WarpedSpace singular_model_space(int euclid_dim, const LatticeTorus& torus, double r_max);
/// [0, 1 + lambda] x_g E^k x_f T from a built pair.
WarpedSpace filling_model_space(const WarpPair& pair, int euclid_dim, const LatticeTorus& torus);

/// Point (r, e, theta). Theta holds lattice coefficients; the fundamental
/// domain is [0, 1)^d.
struct WPoint {
  double r = 0.0;
  Eigen::VectorXd e;
  Eigen::VectorXd theta;
};

WPoint make_point(double r, std::vector<double> e = {}, std::vector<double> theta = {});
bool is_singular(const WarpedSpace& space, const WPoint& p);
/// Equality in the quotient: theta is ignored where the torus warp vanishes.
bool points_equal(const WarpedSpace& space, const WPoint& p, const WPoint& q, double tol = 1e-12);
nlohmann::json to_json(const WPoint& p);
WPoint point_from_json(const nlohmann::json& doc, const WarpedSpace& space, const std::string& field);

/// Segment i joins vertices i and i+1 with theta of vertex i+1 lifted by
/// deck_shifts[i].
struct PolylinePath {
  std::vector<WPoint> vertices;
  std::vector<Eigen::VectorXi> deck_shifts;
};

double segment_length(const WarpedSpace& space, const PolylinePath& path, std::size_t segment);
double path_length(const WarpedSpace& space, const PolylinePath& path);

/// Point at the given arclength from the start of the path.
WPoint point_at_arclength(const WarpedSpace& space, const PolylinePath& path, double arclength);

struct GeodesicResult {
  double distance = 0.0;
  PolylinePath path;
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;
  int segments = 0;
  bool through_core = false;
};

struct SolverOptions {
  int n_segments = 64;
  int max_segments = 4096;
  double refine_tol = 1e-7;
  double gradient_tol = 1e-8;
  int deck_radius = 1;
  int max_newton = 200;
  std::uint64_t seed = 42;
};

/// Shortest path by minimizing a discrete energy over chart polylines, taking
/// the best over deck translates and, in singular spaces, paths that pass
/// through the core. Throws OUT_OF_DOMAIN for points outside the space.
GeodesicResult solve_geodesic(const WarpedSpace& space, const WPoint& p, const WPoint& q,
                              const SolverOptions& options = {});
GeodesicResult solve_geodesic(const WarpedSpace& space, const WPoint& p, const WPoint& q, int n_segments,
                              std::uint64_t seed);

nlohmann::json to_json(const GeodesicResult& result);

double distance_to_core(const WarpedSpace& space, const WPoint& p);

/// Direction at a core point of the standard singular model toward target.
struct SingularDirection {
  double phi = 0.0;
  std::optional<Eigen::VectorXd> alpha;  // unit vector in E^k, absent when phi = pi/2
  Eigen::VectorXd theta;
};

SingularDirection direction_at_singular(const WarpedSpace& space, const Eigen::VectorXd& a0, const WPoint& target);

struct AngleEstimate {
  double value = 0.0;
  std::vector<double> scales;
  std::vector<double> comparison_angles;
  bool monotone = true;  // nonincreasing as the scale shrinks
  double error_estimate = 0.0;
};

/// Alexandrov angle at p between the geodesics toward q1 and q2, from
/// comparison angles at the given scales (Richardson-extrapolated on the two
/// smallest). Throws SOLVER_FAILURE.
AngleEstimate alexandrov_angle(const WarpedSpace& space, const WPoint& p, const WPoint& q1, const WPoint& q2,
                               const std::vector<double>& scales = {0.2, 0.1, 0.05, 0.025},
                               const SolverOptions& options = {});

struct LogResult {
  double radius = 0.0;
  bool singular_base = false;
  SingularDirection direction;    // singular base point
  Eigen::VectorXd unit_tangent;   // regular base point, orthonormal-frame components
};

LogResult log_map(const WarpedSpace& space, const WPoint& p, const WPoint& x, const SolverOptions& options = {});

/// Distance between two log images in the tangent cone at p.
double tangent_cone_distance(const WarpedSpace& space, const LogResult& a, const LogResult& b);

}  // namespace warpfill
