#include "warpfill/warp_functions.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include "warpfill/error.hpp"
#include "warpfill/quadrature.hpp"

namespace warpfill {

namespace {

constexpr double kConstructionTol = 1e-9;
constexpr int kSpliceDepth = 12;

double smooth_step(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / x);
  const double b = std::exp(-1.0 / (1.0 - x));
  return a / (a + b);
}

// Peak value 1 at x = 1/2, flat zero outside (0, 1).
double bump(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  const double y = 2.0 * x - 1.0;
  return std::exp(1.0 - 1.0 / (1.0 - y * y));
}

FunctionHandle analytic_handle(PieceKind kind, double shift) {
  switch (kind) {
    case PieceKind::Sinh:
      return [](double r, int order) { return order % 2 == 0 ? std::sinh(r) : std::cosh(r); };
    case PieceKind::Cosh:
      return [](double r, int order) { return order % 2 == 0 ? std::cosh(r) : std::sinh(r); };
    case PieceKind::ExpShift:
      return [shift](double r, int) { return std::exp(r - shift); };
    default:
      throw Error(ErrorCode::InvalidInput, "analytic_handle: not an analytic piece kind");
  }
}

}  // namespace

Line Line::tangent(const FunctionHandle& fn, double x0) {
  const double slope = fn(x0, 1);
  return Line{slope, fn(x0, 0) - slope * x0};
}

// ---------------------------------------------------------------------------
// Ellipse interpolation

EllipseArc interpolate_tangent(const Line& l1, const Line& l2, double A, double B) {
  if (!(l1.slope < l2.slope)) throw Error(ErrorCode::SlopeOrder, "l1.slope must be < l2.slope");
  const double x_cross = (l1.intercept - l2.intercept) / (l2.slope - l1.slope);
  if (!(A < x_cross && x_cross < B))
    throw Error(ErrorCode::IntersectionOutside, "lines cross at x=" + std::to_string(x_cross) + ", outside (" +
                                                    std::to_string(A) + ", " + std::to_string(B) + ")");
  EllipseArc arc;
  arc.l1 = l1;
  arc.l2 = l2;
  arc.A = A;
  arc.B = B;
  const double px = x_cross;
  const double py = l1(x_cross);
  arc.affine_map = {{{B - px, A - px, px}, {l2(B) - py, l1(A) - py, py}}};

  // Graph must be single-valued over [A, B].
  double prev = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 1000; ++i) {
    const double t = 0.5 * std::numbers::pi * i / 1000.0;
    const double u = 1.0 - std::cos(t);
    const double v = 1.0 - std::sin(t);
    const double x = arc.affine_map[0][0] * u + arc.affine_map[0][1] * v + px;
    if (x < prev - 1e-12) throw Error(ErrorCode::Degenerate, "ellipse arc is not a graph over [A, B]");
    prev = x;
  }

  const int n = std::max(2, static_cast<int>(std::ceil((B - A) / 1e-3)));
  const double h = (B - A) / n;
  double min_second = std::numeric_limits<double>::infinity();
  for (int i = 1; i < n; ++i) {
    const double x = A + i * h;
    const double d2 = (arc.eval(x + h, 0) - 2.0 * arc.eval(x, 0) + arc.eval(x - h, 0)) / (h * h);
    min_second = std::min(min_second, d2);
  }
  arc.convexity_floor = 0.9 * min_second;
  return arc;
}

double EllipseArc::eval(double x, int order) const {
  const double ux = affine_map[0][0], vx = affine_map[0][1], px = affine_map[0][2];
  const double uy = affine_map[1][0], vy = affine_map[1][1], py = affine_map[1][2];
  const double det = ux * vy - vx * uy;
  // Inverse of the linear part: (u, v) = Minv * (x - px, y - py).
  const double m00 = vy / det, m01 = -vx / det;
  const double m10 = -uy / det, m11 = ux / det;
  const double dx = x - px;
  // u = au + bu * (y - py), v = av + bv * (y - py)
  const double au = m00 * dx, bu = m01;
  const double av = m10 * dx, bv = m11;
  // (u - 1)^2 + (v - 1)^2 - 1 = 0, quadratic in w = y - py.
  const double qa = bu * bu + bv * bv;
  const double qb = 2.0 * (bu * (au - 1.0) + bv * (av - 1.0));
  const double qc = (au - 1.0) * (au - 1.0) + (av - 1.0) * (av - 1.0) - 1.0;
  const double disc = std::max(0.0, qb * qb - 4.0 * qa * qc);
  const double sq = std::sqrt(disc);
  const double q = -0.5 * (qb + std::copysign(sq, qb));
  double roots[2] = {q / qa, q != 0.0 ? qc / q : q / qa};
  // Choose the root lying on the quarter arc nearest the two lines.
  double best_w = roots[0];
  double best_violation = std::numeric_limits<double>::infinity();
  for (double w : roots) {
    const double u = au + bu * w;
    const double v = av + bv * w;
    const double violation = std::max({0.0, u - 1.0, v - 1.0, -u, -v});
    if (violation < best_violation) {
      best_violation = violation;
      best_w = w;
    }
  }
  const double y = py + best_w;
  if (order == 0) return y;
  const double u = au + bu * best_w;
  const double v = av + bv * best_w;
  const double fx = 2.0 * ((u - 1.0) * m00 + (v - 1.0) * m10);
  const double fy = 2.0 * ((u - 1.0) * m01 + (v - 1.0) * m11);
  const double y1 = -fx / fy;
  if (order == 1) return y1;
  const double fxx = 2.0 * (m00 * m00 + m10 * m10);
  const double fxy = 2.0 * (m00 * m01 + m10 * m11);
  const double fyy = 2.0 * (m01 * m01 + m11 * m11);
  return -(fxx + 2.0 * fxy * y1 + fyy * y1 * y1) / fy;
}

// ---------------------------------------------------------------------------
// Mollified splice

MollifiedSplice::MollifiedSplice(FunctionHandle left, FunctionHandle right, double R, double width)
    : left_(std::move(left)), right_(std::move(right)), R_(R), width_(width) {
  if (!(width > 0.0)) throw Error(ErrorCode::InvalidInput, "agol_smooth: eps must be positive");
  const double dv = std::abs(left_(R, 0) - right_(R, 0));
  const double ds = std::abs(left_(R, 1) - right_(R, 1));
  if (dv > kConstructionTol || ds > kConstructionTol)
    throw Error(ErrorCode::Mismatch, "pieces disagree to first order at R (value gap " + std::to_string(dv) +
                                         ", slope gap " + std::to_string(ds) + ")");
  left_value_ = left_(R - width, 0);
  left_slope_ = left_(R - width, 1);

  const double b2 = left_(R, 2);
  const double c2 = right_(R, 2);
  const double lo = std::min(b2, c2) - 0.1 * std::abs(std::min(b2, c2));
  const double hi = std::max(b2, c2) + 0.1 * std::abs(std::max(b2, c2));
  // Shrink the blend zone until the sampled second derivative sits in the band;
  // otherwise keep the width that strays least.
  double best_tau = tau_;
  double best_excursion = std::numeric_limits<double>::infinity();
  for (tau_ = 0.5; tau_ >= 1.0 / 4096.0; tau_ *= 0.5) {
    solve_weights();
    const double excursion = band_excursion(lo, hi);
    if (excursion <= 0.0) return;
    if (excursion < best_excursion) {
      best_excursion = excursion;
      best_tau = tau_;
    }
  }
  tau_ = best_tau;
  solve_weights();
}

double MollifiedSplice::second(double r) const {
  const double s = (r - (R_ - width_)) / width_;
  const double s1 = 0.5 * (1.0 - tau_);
  const double s2 = 1.0 - tau_;
  const double phi = smooth_step((s - s2) / tau_);
  double out = 0.0;
  if (phi < 1.0) out += (1.0 - phi) * left_(r, 2);
  if (phi > 0.0) out += phi * right_(r, 2);
  return out + alpha_ * bump(s / s1) + beta_ * bump((s - s1) / (s2 - s1));
}

void MollifiedSplice::solve_weights() {
  alpha_ = beta_ = 0.0;
  const double a = R_ - width_;
  const double s1 = 0.5 * (1.0 - tau_);
  const double s2 = 1.0 - tau_;
  const double breaks[4] = {a, a + s1 * width_, a + s2 * width_, R_};
  auto integrate = [&](auto&& fn) {
    double total = 0.0;
    for (int i = 0; i < 3; ++i) total += quad::adaptive(fn, breaks[i], breaks[i + 1], 1e-13, 1e-16, kSpliceDepth);
    return total;
  };
  const double base0 = integrate([&](double x) { return second(x); });
  const double base1 = integrate([&](double x) { return (R_ - x) * second(x); });
  auto psi1 = [&](double x) { return bump((x - a) / width_ / s1); };
  auto psi2 = [&](double x) { return bump(((x - a) / width_ - s1) / (s2 - s1)); };
  const double p10 = integrate(psi1);
  const double p11 = integrate([&](double x) { return (R_ - x) * psi1(x); });
  const double p20 = integrate(psi2);
  const double p21 = integrate([&](double x) { return (R_ - x) * psi2(x); });
  const double target_slope = right_(R_, 1) - left_slope_;
  const double target_value = right_(R_, 0) - left_value_ - left_slope_ * width_;
  const double r0 = target_slope - base0;
  const double r1 = target_value - base1;
  const double det = p10 * p21 - p20 * p11;
  alpha_ = (r0 * p21 - p20 * r1) / det;
  beta_ = (p10 * r1 - r0 * p11) / det;
}

double MollifiedSplice::band_excursion(double lo, double hi) const {
  constexpr int kSamples = 2000;
  const double slack = 1e-12 * std::max(1.0, std::abs(hi));
  double worst = 0.0;
  for (int i = 0; i <= kSamples; ++i) {
    const double r = R_ - width_ + width_ * i / kSamples;
    const double v = second(r);
    worst = std::max({worst, lo - slack - v, v - hi - slack});
  }
  return worst;
}

double MollifiedSplice::eval(double r, int order) const {
  const double a = R_ - width_;
  if (r <= a) return left_(r, order);
  if (r >= R_) return right_(r, order);
  if (order == 2) return second(r);
  const double s1 = 0.5 * (1.0 - tau_);
  const double s2 = 1.0 - tau_;
  const double breaks[4] = {a, a + s1 * width_, a + s2 * width_, R_};
  double integral = 0.0;
  for (int i = 0; i < 3 && breaks[i] < r; ++i) {
    const double upper = std::min(r, breaks[i + 1]);
    if (order == 1) {
      integral += quad::adaptive([&](double x) { return second(x); }, breaks[i], upper, 1e-13, 1e-16, kSpliceDepth);
    } else {
      integral += quad::adaptive([&](double x) { return (r - x) * second(x); }, breaks[i], upper, 1e-13, 1e-16, kSpliceDepth);
    }
  }
  if (order == 1) return left_slope_ + integral;
  return left_value_ + left_slope_ * (r - a) + integral;
}

Piece agol_smooth(const FunctionHandle& b, const FunctionHandle& c, double R, double eps) {
  Piece piece;
  piece.kind = PieceKind::MollifiedSplice;
  piece.splice = std::make_shared<const MollifiedSplice>(b, c, R, eps);
  piece.lo = R - eps;
  piece.hi = R;
  return piece;
}

// ---------------------------------------------------------------------------
// Pieces and piecewise functions

std::string piece_kind_name(PieceKind kind) {
  switch (kind) {
    case PieceKind::Sinh: return "SINH";
    case PieceKind::Cosh: return "COSH";
    case PieceKind::ExpShift: return "EXP_SHIFT";
    case PieceKind::EllipseArc: return "ELLIPSE_ARC";
    case PieceKind::MollifiedSplice: return "MOLLIFIED_SPLICE";
  }
  return "UNKNOWN";
}

double Piece::eval(double r, int order) const {
  switch (kind) {
    case PieceKind::Sinh: return order % 2 == 0 ? std::sinh(r) : std::cosh(r);
    case PieceKind::Cosh: return order % 2 == 0 ? std::cosh(r) : std::sinh(r);
    case PieceKind::ExpShift: return std::exp(r - shift);
    case PieceKind::EllipseArc: return arc->eval(r, order);
    case PieceKind::MollifiedSplice: return splice->eval(r, order);
  }
  return 0.0;
}

FunctionHandle Piece::handle() const {
  switch (kind) {
    case PieceKind::Sinh:
    case PieceKind::Cosh:
    case PieceKind::ExpShift: return analytic_handle(kind, shift);
    case PieceKind::EllipseArc: {
      auto held = arc;
      return [held](double r, int order) { return held->eval(r, order); };
    }
    case PieceKind::MollifiedSplice: {
      auto held = splice;
      return [held](double r, int order) { return held->eval(r, order); };
    }
  }
  return {};
}

const Piece& SmoothWarpFunction::piece_at(double r, Side side) const {
  // First piece whose upper end is >= r (left side) or > r (right side).
  auto it = side == Side::Left
                ? std::lower_bound(pieces.begin(), pieces.end(), r, [](const Piece& p, double x) { return p.hi < x; })
                : std::upper_bound(pieces.begin(), pieces.end(), r, [](double x, const Piece& p) { return x < p.hi; });
  if (it == pieces.end()) return pieces.back();
  return *it;
}

double eval(const SmoothWarpFunction& fn, double r, int order, Side side) {
  if (order < 0 || order > 2) throw Error(ErrorCode::InvalidInput, "eval: order must be 0, 1 or 2");
  constexpr double slack = 1e-12;
  if (fn.pieces.empty() || r < fn.domain_lo() - slack || r > fn.domain_hi() + slack)
    throw Error(ErrorCode::OutOfDomain, "r=" + std::to_string(r) + " outside warp domain");
  return fn.piece_at(r, side).eval(r, order);
}

// ---------------------------------------------------------------------------
// Assembly of f and g

namespace {

struct Tangents {
  Line sinh_line;
  Line cosh_line;
  Line tail_line;
  double x_sinh;
  double x_cosh;
};

Tangents tangents_at(double lambda, double delta0) {
  const double top = 1.0 + 0.5 * lambda;
  Tangents t;
  t.sinh_line = Line::tangent(analytic_handle(PieceKind::Sinh, 0.0), delta0);
  t.cosh_line = Line::tangent(analytic_handle(PieceKind::Cosh, 0.0), delta0);
  t.tail_line = Line::tangent(analytic_handle(PieceKind::ExpShift, 1.0), top);
  auto cross = [&](const Line& l) { return (l.intercept - t.tail_line.intercept) / (t.tail_line.slope - l.slope); };
  t.x_sinh = cross(t.sinh_line);
  t.x_cosh = cross(t.cosh_line);
  return t;
}

bool delta0_admissible(double lambda, double delta0) {
  const double top = 1.0 + 0.5 * lambda;
  if (!(delta0 > 0.0 && delta0 < top)) return false;
  const Tangents t = tangents_at(lambda, delta0);
  if (!(t.sinh_line.slope < t.tail_line.slope && t.cosh_line.slope < t.tail_line.slope)) return false;
  return t.x_sinh > delta0 && t.x_sinh < top && t.x_cosh > delta0 && t.x_cosh < top;
}

Piece analytic_piece(PieceKind kind, double lo, double hi, double shift = 0.0) {
  Piece p;
  p.kind = kind;
  p.lo = lo;
  p.hi = hi;
  p.shift = shift;
  return p;
}

nlohmann::json piece_to_json(const Piece& p);

SmoothWarpFunction assemble(PieceKind head_kind, const Line& head_line, const Tangents& t, double lambda,
                            double delta0, double delta, bool mollify, double eps) {
  const double top = 1.0 + 0.5 * lambda;
  const double end = 1.0 + lambda;
  Piece head = analytic_piece(head_kind, 0.0, delta0);
  Piece arc;
  arc.kind = PieceKind::EllipseArc;
  arc.lo = delta0;
  arc.hi = top;
  arc.arc = std::make_shared<const EllipseArc>(interpolate_tangent(head_line, t.tail_line, delta0, top));
  Piece tail = analytic_piece(PieceKind::ExpShift, top, end, 1.0);

  SmoothWarpFunction fn;
  fn.lambda = lambda;
  fn.delta0 = delta0;
  fn.delta = delta;
  if (!mollify) {
    fn.pieces = {head, arc, tail};
  } else {
    Piece left_splice = agol_smooth(head.handle(), arc.handle(), delta0, eps);
    Piece right_splice = agol_smooth(arc.handle(), tail.handle(), top, eps);
    auto attach = [](Piece& splice, const Piece& l, const Piece& r) {
      auto copy = std::make_shared<MollifiedSplice>(*splice.splice);
      copy->left_desc = piece_to_json(l);
      copy->right_desc = piece_to_json(r);
      splice.splice = copy;
    };
    attach(left_splice, head, arc);
    attach(right_splice, arc, tail);
    head.hi = delta0 - eps;
    arc.hi = top - eps;
    fn.pieces = {head, left_splice, arc, right_splice, tail};
  }
  for (std::size_t i = 0; i + 1 < fn.pieces.size(); ++i) fn.knots.push_back(fn.pieces[i].hi);
  return fn;
}

double grid_min_second(const SmoothWarpFunction& fn, double lo, double hi, double step) {
  const int n = static_cast<int>(std::ceil((hi - lo) / step));
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n; ++i) {
    const double r = std::min(hi, lo + i * step);
    best = std::min({best, eval(fn, r, 2, Side::Left), eval(fn, r, 2, Side::Right)});
  }
  for (double k : fn.knots) best = std::min({best, eval(fn, k, 2, Side::Left), eval(fn, k, 2, Side::Right)});
  return best;
}

}  // namespace

double select_delta0(double lambda, double hint) {
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidInput, "lambda must be positive");
  if (delta0_admissible(lambda, hint)) return hint;
  double lo = 0.0;
  double hi = hint;
  // Near zero the predicate holds (the tangents at 0 cross the tail line inside).
  double probe = std::min(hint, 1e-6);
  while (!delta0_admissible(lambda, probe) && probe > 1e-300) probe *= 0.5;
  lo = probe;
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    if (delta0_admissible(lambda, mid))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

WarpPair build_fg(double lambda, const WarpBuildOptions& options) {
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidInput, "lambda must be positive");
  const double hint = options.delta0_hint.value_or(0.2);
  if (!(hint > 0.0)) throw Error(ErrorCode::InvalidInput, "delta0 hint must be positive");
  const double delta0 = select_delta0(lambda, hint);
  const double eps = options.eps.value_or(0.5 * std::min(delta0, 0.5 * lambda));
  if (!(eps > 0.0 && eps < std::min(delta0, 0.5 * lambda)))
    throw Error(ErrorCode::InvalidInput, "eps must lie in (0, min(delta0, lambda/2))");
  const double delta = delta0 - eps;
  const Tangents t = tangents_at(lambda, delta0);

  WarpPair pair;
  pair.lambda = lambda;
  pair.delta0 = delta0;
  pair.delta = delta;
  pair.mollified = options.mollify;
  pair.f = assemble(PieceKind::Sinh, t.sinh_line, t, lambda, delta0, delta, options.mollify, eps);
  pair.g = assemble(PieceKind::Cosh, t.cosh_line, t, lambda, delta0, delta, options.mollify, eps);

  const double end = 1.0 + lambda;
  constexpr double kStep = 1e-4;
  pair.kappa_floor = std::min(0.9 * grid_min_second(pair.g, 0.0, end, kStep), 1.0);
  pair.g.convexity_floor = pair.kappa_floor;
  // f'' vanishes at 0; its floor is taken on (0, 1 + lambda].
  pair.f.convexity_floor = 0.9 * grid_min_second(pair.f, kStep, end, kStep);
  return pair;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

nlohmann::json piece_to_json(const Piece& p) {
  nlohmann::json j;
  j["kind"] = piece_kind_name(p.kind);
  j["lo"] = p.lo;
  j["hi"] = p.hi;
  switch (p.kind) {
    case PieceKind::ExpShift: j["shift"] = p.shift; break;
    case PieceKind::EllipseArc:
      j["l1"] = {p.arc->l1.slope, p.arc->l1.intercept};
      j["l2"] = {p.arc->l2.slope, p.arc->l2.intercept};
      j["A"] = p.arc->A;
      j["B"] = p.arc->B;
      j["affine_map"] = p.arc->affine_map;
      j["convexity_floor"] = p.arc->convexity_floor;
      break;
    case PieceKind::MollifiedSplice:
      if (p.splice->left_desc.is_null() || p.splice->right_desc.is_null())
        throw Error(ErrorCode::InvalidInput, "splice built from opaque handles cannot be serialized");
      j["R"] = p.splice->knot();
      j["width"] = p.splice->width();
      j["tau"] = p.splice->tau();
      j["alpha"] = p.splice->alpha();
      j["beta"] = p.splice->beta();
      j["left"] = p.splice->left_desc;
      j["right"] = p.splice->right_desc;
      break;
    default: break;
  }
  return j;
}

PieceKind kind_from_name(const std::string& name) {
  for (PieceKind k : {PieceKind::Sinh, PieceKind::Cosh, PieceKind::ExpShift, PieceKind::EllipseArc,
                      PieceKind::MollifiedSplice})
    if (piece_kind_name(k) == name) return k;
  throw Error(ErrorCode::InvalidInput, "pieces[].kind: unknown piece kind '" + name + "'");
}

Piece piece_from_json(const nlohmann::json& j) {
  Piece p;
  p.kind = kind_from_name(j.at("kind").get<std::string>());
  p.lo = j.at("lo").get<double>();
  p.hi = j.at("hi").get<double>();
  switch (p.kind) {
    case PieceKind::ExpShift: p.shift = j.at("shift").get<double>(); break;
    case PieceKind::EllipseArc: {
      const auto l1 = j.at("l1").get<std::array<double, 2>>();
      const auto l2 = j.at("l2").get<std::array<double, 2>>();
      p.arc = std::make_shared<const EllipseArc>(
          interpolate_tangent(Line{l1[0], l1[1]}, Line{l2[0], l2[1]}, j.at("A").get<double>(), j.at("B").get<double>()));
      break;
    }
    case PieceKind::MollifiedSplice: {
      const Piece left = piece_from_json(j.at("left"));
      const Piece right = piece_from_json(j.at("right"));
      auto splice = std::make_shared<MollifiedSplice>(left.handle(), right.handle(), j.at("R").get<double>(),
                                                      j.at("width").get<double>());
      splice->left_desc = j.at("left");
      splice->right_desc = j.at("right");
      p.splice = splice;
      break;
    }
    default: break;
  }
  return p;
}

}  // namespace

nlohmann::json to_json(const SmoothWarpFunction& fn) {
  nlohmann::json doc;
  doc["version"] = 1;
  doc["pieces"] = nlohmann::json::array();
  for (const Piece& p : fn.pieces) doc["pieces"].push_back(piece_to_json(p));
  doc["knots"] = fn.knots;
  doc["lambda"] = fn.lambda;
  doc["delta"] = fn.delta;
  doc["delta0"] = fn.delta0;
  doc["kappa_floor"] = fn.convexity_floor;
  return doc;
}

SmoothWarpFunction smooth_warp_from_json(const nlohmann::json& doc) {
  if (!doc.contains("pieces") || !doc["pieces"].is_array() || doc["pieces"].empty())
    throw Error(ErrorCode::InvalidInput, "pieces: expected a non-empty array");
  SmoothWarpFunction fn;
  for (const auto& pj : doc["pieces"]) fn.pieces.push_back(piece_from_json(pj));
  for (std::size_t i = 0; i + 1 < fn.pieces.size(); ++i) {
    if (std::abs(fn.pieces[i].hi - fn.pieces[i + 1].lo) > 1e-12)
      throw Error(ErrorCode::InvalidInput, "pieces: gap or overlap at index " + std::to_string(i));
    fn.knots.push_back(fn.pieces[i].hi);
  }
  fn.lambda = doc.at("lambda").get<double>();
  fn.delta = doc.at("delta").get<double>();
  fn.delta0 = doc.at("delta0").get<double>();
  fn.convexity_floor = doc.at("kappa_floor").get<double>();
  return fn;
}

nlohmann::json to_json(const WarpPair& pair) {
  nlohmann::json doc;
  doc["f"] = to_json(pair.f);
  doc["g"] = to_json(pair.g);
  doc["lambda"] = pair.lambda;
  doc["delta"] = pair.delta;
  doc["delta0"] = pair.delta0;
  doc["kappa_floor"] = pair.kappa_floor;
  doc["mollified"] = pair.mollified;
  return doc;
}

std::string sample_table_csv(const WarpPair& pair, int n) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "r,f,f',f'',g,g',g''\n";
  const double end = pair.f.domain_hi();
  for (int i = 0; i <= n; ++i) {
    const double r = end * i / n;
    out << r;
    for (const SmoothWarpFunction* fn : {&pair.f, &pair.g})
      for (int order = 0; order <= 2; ++order) out << ',' << eval(*fn, r, order, Side::Right);
    out << '\n';
  }
  return out.str();
}

}  // namespace warpfill
