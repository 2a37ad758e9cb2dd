#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace warpfill {

enum class Side { Left, Right };

/// A real function of one variable queried by derivative order (0, 1 or 2).
using FunctionHandle = std::function<double(double r, int order)>;

/// y = slope * x + intercept
struct Line {
  double slope = 0.0;
  double intercept = 0.0;

  double operator()(double x) const { return slope * x + intercept; }
  static Line tangent(const FunctionHandle& fn, double x0);
};

/// Convex C-infinity graph joining two lines, cut from the affine image of the
/// circle (u-1)^2 + (v-1)^2 = 1. The affine map sends (0,1) to (A, l1(A)),
/// (1,0) to (B, l2(B)) and (0,0) to the crossing point of the two lines.
struct EllipseArc {
  Line l1;
  Line l2;
  double A = 0.0;
  double B = 0.0;
  // Columns: image of e_u, image of e_v, image of the origin.
  std::array<std::array<double, 3>, 2> affine_map{};
  double convexity_floor = 0.0;

  double eval(double x, int order) const;
};

/// Builds the tangent-interpolating arc; throws SLOPE_ORDER or
/// INTERSECTION_OUTSIDE.
EllipseArc interpolate_tangent(const Line& l1, const Line& l2, double A, double B);

/// C-infinity splice a_eps between b (left) and c (right) agreeing to first
/// order at R. On [R - width, R] the second derivative is a smooth blend of
/// b'' and c'' plus two interior bumps whose weights restore value and slope
/// at R exactly.
class MollifiedSplice {
 public:
  MollifiedSplice(FunctionHandle left, FunctionHandle right, double R, double width);

  double eval(double r, int order) const;

  double knot() const { return R_; }
  double width() const { return width_; }
  double tau() const { return tau_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

  // Serialized descriptions of the two sides, when they came from known pieces.
  nlohmann::json left_desc;
  nlohmann::json right_desc;

 private:
  double second(double r) const;
  void solve_weights();
  double band_excursion(double lo, double hi) const;

  FunctionHandle left_;
  FunctionHandle right_;
  double R_;
  double width_;
  double tau_ = 0.5;
  double alpha_ = 0.0;
  double beta_ = 0.0;
  double left_value_ = 0.0;
  double left_slope_ = 0.0;
};

enum class PieceKind { Sinh, Cosh, ExpShift, EllipseArc, MollifiedSplice };

struct Piece {
  double lo = 0.0;
  double hi = 0.0;
  PieceKind kind = PieceKind::Sinh;
  double shift = 0.0;  // ExpShift: e^(r - shift)
  std::shared_ptr<const EllipseArc> arc;
  std::shared_ptr<const MollifiedSplice> splice;

  double eval(double r, int order) const;
  FunctionHandle handle() const;
};

std::string piece_kind_name(PieceKind kind);

struct SmoothWarpFunction {
  std::vector<Piece> pieces;
  std::vector<double> knots;  // interior piece boundaries, sorted
  double lambda = 0.0;
  double delta = 0.0;
  double delta0 = 0.0;
  double convexity_floor = 0.0;

  double domain_lo() const { return pieces.front().lo; }
  double domain_hi() const { return pieces.back().hi; }
  const Piece& piece_at(double r, Side side) const;
};

/// Evaluates the function or one of its first two derivatives. At a knot the
/// side picks the one-sided limit. Throws OUT_OF_DOMAIN.
double eval(const SmoothWarpFunction& fn, double r, int order, Side side = Side::Right);

/// Smooths the C1 corner of "b for r < R, c for r >= R" over [R - eps, R].
/// Throws MISMATCH when b and c do not agree to first order at R.
Piece agol_smooth(const FunctionHandle& b, const FunctionHandle& c, double R, double eps);

struct WarpPair {
  SmoothWarpFunction f;
  SmoothWarpFunction g;
  double delta = 0.0;
  double delta0 = 0.0;
  double kappa_floor = 0.0;
  double lambda = 0.0;
  bool mollified = false;
};

struct WarpBuildOptions {
  std::optional<double> delta0_hint;  // default 0.2
  bool mollify = false;
  std::optional<double> eps;  // splice width; default min(delta0, lambda/2)/2
};

/// Assembles f (sinh -> ellipse -> e^(r-1)) and g (cosh -> ellipse -> e^(r-1))
/// on [0, 1 + lambda].
WarpPair build_fg(double lambda, const WarpBuildOptions& options = {});

/// Largest delta0 <= hint (found by bisection) for which the tangent lines of
/// sinh and cosh at delta0 cross the tangent of e^(r-1) at 1 + lambda/2 inside
/// (delta0, 1 + lambda/2).
double select_delta0(double lambda, double hint);

nlohmann::json to_json(const SmoothWarpFunction& fn);
SmoothWarpFunction smooth_warp_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const WarpPair& pair);

/// CSV table "r,f,f',f'',g,g',g''" on n + 1 equally spaced points.
std::string sample_table_csv(const WarpPair& pair, int n);

}  // namespace warpfill
