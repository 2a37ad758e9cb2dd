#include "warpfill/warp_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "warpfill/error.hpp"
#include "warpfill/quadrature.hpp"

namespace warpfill {

// ---------------------------------------------------------------------------
// Warps

Warp Warp::analytic(Kind kind, double shift, double rate, double scale) {
  if (kind == Kind::Piecewise) throw Error(ErrorCode::InvalidInput, "piecewise warp needs a function");
  if (!(rate > 0.0 && scale > 0.0 && std::isfinite(shift)))
    throw Error(ErrorCode::InvalidInput, "analytic warp needs positive rate and scale");
  Warp w;
  w.kind_ = kind;
  w.shift_ = shift;
  w.rate_ = rate;
  w.scale_ = scale;
  return w;
}

Warp Warp::exp_shift(double shift, double rate) { return analytic(Kind::ExpShift, shift, rate); }

Warp Warp::constant(double value) { return analytic(Kind::Constant, 0.0, 1.0, value); }

Warp Warp::piecewise(SmoothWarpFunction fn) {
  Warp w;
  w.kind_ = Kind::Piecewise;
  w.fn_ = std::make_shared<const SmoothWarpFunction>(std::move(fn));
  return w;
}

double Warp::operator()(double r, int order) const {
  if (kind_ == Kind::Piecewise) {
    const double lo = fn_->domain_lo(), hi = fn_->domain_hi();
    return eval(*fn_, std::clamp(r, lo, hi), order, r >= hi ? Side::Left : Side::Right);
  }
  const double x = rate_ * (r - shift_);
  const double chain = std::pow(rate_, order) * scale_;
  switch (kind_) {
    case Kind::Sinh: return chain * (order % 2 == 0 ? std::sinh(x) : std::cosh(x));
    case Kind::Cosh: return chain * (order % 2 == 0 ? std::cosh(x) : std::sinh(x));
    case Kind::ExpShift: return chain * std::exp(x);
    case Kind::LinearR: return order == 0 ? scale_ * x : order == 1 ? chain : 0.0;
    case Kind::Constant: return order == 0 ? scale_ : 0.0;
    case Kind::Piecewise: break;
  }
  return 0.0;
}

FunctionHandle Warp::handle() const {
  Warp copy = *this;
  return [copy](double r, int order) { return copy(r, order); };
}

namespace {

const char* analytic_tag(Warp::Kind kind) {
  switch (kind) {
    case Warp::Kind::Sinh: return "sinh";
    case Warp::Kind::Cosh: return "cosh";
    case Warp::Kind::ExpShift: return "exp_shift";
    case Warp::Kind::LinearR: return "linear_r";
    case Warp::Kind::Constant: return "constant";
    case Warp::Kind::Piecewise: return "piecewise";
  }
  return "";
}

double optional_number(const nlohmann::json& doc, const char* key, double fallback, const std::string& field) {
  if (!doc.contains(key)) return fallback;
  if (!doc[key].is_number()) throw Error(ErrorCode::InvalidInput, field + "." + key + ": expected a number");
  return doc[key].get<double>();
}

}  // namespace

nlohmann::json Warp::to_json() const {
  if (kind_ == Kind::Piecewise) return warpfill::to_json(*fn_);
  nlohmann::json j = {{"analytic", analytic_tag(kind_)}};
  if (shift_ != 0.0) j["shift"] = shift_;
  if (rate_ != 1.0) j["rate"] = rate_;
  if (scale_ != 1.0) j["scale"] = scale_;
  return j;
}

Warp Warp::from_json(const nlohmann::json& doc, const std::string& field) {
  if (!doc.is_object()) throw Error(ErrorCode::InvalidInput, field + ": expected an object");
  try {
    if (doc.contains("analytic")) {
      const std::string tag = doc["analytic"].get<std::string>();
      const double shift = optional_number(doc, "shift", 0.0, field);
      const double rate = optional_number(doc, "rate", 1.0, field);
      const double scale = optional_number(doc, "scale", 1.0, field);
      for (Kind k : {Kind::Sinh, Kind::Cosh, Kind::ExpShift, Kind::LinearR, Kind::Constant})
        if (tag == analytic_tag(k)) return analytic(k, shift, rate, scale);
      throw Error(ErrorCode::InvalidInput, field + ".analytic: unknown tag '" + tag + "'");
    }
    if (doc.contains("build_fg")) {
      const auto& b = doc["build_fg"];
      WarpBuildOptions opts;
      if (b.contains("delta0")) opts.delta0_hint = b["delta0"].get<double>();
      if (b.contains("mollify")) opts.mollify = b["mollify"].get<bool>();
      const WarpPair pair = build_fg(b.at("lambda").get<double>(), opts);
      const std::string which = doc.value("which", "f");
      if (which != "f" && which != "g") throw Error(ErrorCode::InvalidInput, field + ".which: expected \"f\" or \"g\"");
      return piecewise(which == "f" ? pair.f : pair.g);
    }
    if (doc.contains("pieces")) return piecewise(smooth_warp_from_json(doc));
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::InvalidInput, field + ": " + ex.what());
  }
  throw Error(ErrorCode::InvalidInput, field + ": expected \"analytic\", \"build_fg\" or \"pieces\"");
}

// ---------------------------------------------------------------------------
// Spaces

WarpedSpace WarpedSpace::make(double r_min, double r_max, int euclid_dim, Warp warp_g,
                              std::optional<LatticeTorus> torus, Warp warp_f) {
  if (!(std::isfinite(r_min) && std::isfinite(r_max) && r_min < r_max))
    throw Error(ErrorCode::InvalidInput, "interval: expected finite a < b");
  if (euclid_dim < 0) throw Error(ErrorCode::InvalidInput, "euclid_dim: must be >= 0");
  WarpedSpace s;
  s.r_min = r_min;
  s.r_max = r_max;
  s.euclid_dim = euclid_dim;
  s.warp_g = std::move(warp_g);
  s.torus = std::move(torus);
  s.warp_f = std::move(warp_f);
  constexpr int kSamples = 1000;
  for (int i = 0; i <= kSamples; ++i) {
    const double r = r_min + (r_max - r_min) * i / kSamples;
    if (euclid_dim > 0 && !(s.warp_g(r) > 0.0))
      throw Error(ErrorCode::NonpositiveWarp, "warp_g is not positive at r=" + std::to_string(r));
    if (s.torus && i > 0 && !(s.warp_f(r) > 0.0))
      throw Error(ErrorCode::NonpositiveWarp, "warp_f is not positive at r=" + std::to_string(r));
  }
  if (s.torus) {
    const double f0 = s.warp_f(r_min);
    if (f0 < 0.0) throw Error(ErrorCode::NonpositiveWarp, "warp_f is negative at r_min");
    s.singular_at_zero = f0 < 1e-12;
  }
  return s;
}

nlohmann::json to_json(const WarpedSpace& space) {
  nlohmann::json j;
  j["interval"] = {space.r_min, space.r_max};
  j["euclid_dim"] = space.euclid_dim;
  j["warp_g"] = space.warp_g.to_json();
  j["torus"] = space.torus ? to_json(*space.torus) : nlohmann::json(nullptr);
  j["warp_f"] = space.warp_f.to_json();
  j["singular_at_zero"] = space.singular_at_zero;
  return j;
}

WarpedSpace warped_space_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::InvalidInput, "space: expected an object");
  if (!doc.contains("interval") || !doc["interval"].is_array() || doc["interval"].size() != 2)
    throw Error(ErrorCode::InvalidInput, "interval: expected [a, b]");
  const double a = doc["interval"][0].get<double>();
  const double b = doc["interval"][1].get<double>();
  const int k = doc.value("euclid_dim", 0);
  Warp g = doc.contains("warp_g") ? Warp::from_json(doc["warp_g"], "warp_g") : Warp::constant(1.0);
  std::optional<LatticeTorus> torus;
  if (doc.contains("torus") && !doc["torus"].is_null()) {
    try {
      torus = lattice_from_json(doc["torus"]);
    } catch (const Error& ex) {
      throw Error(ErrorCode::InvalidInput, std::string("torus.") + ex.what());
    }
  }
  Warp f = doc.contains("warp_f") ? Warp::from_json(doc["warp_f"], "warp_f") : Warp::constant(1.0);
  return WarpedSpace::make(a, b, k, std::move(g), std::move(torus), std::move(f));
}

WarpedSpace hyperbolic_plane_space(double scale, double r_bound) {
  return WarpedSpace::make(-r_bound, r_bound, 1, Warp::exp_shift(0.0, 1.0 / scale), std::nullopt, Warp::constant(1.0));
}

WarpedSpace hyperbolic_space(int euclid_dim, double r_bound) {
  return WarpedSpace::make(-r_bound, r_bound, euclid_dim, Warp::exp_shift(0.0), std::nullopt, Warp::constant(1.0));
}

WarpedSpace flat_plane_space(double r_bound) {
  return WarpedSpace::make(-r_bound, r_bound, 1, Warp::constant(1.0), std::nullopt, Warp::constant(1.0));
}

WarpedSpace singular_model_space(int euclid_dim, const LatticeTorus& torus, double r_max) {
  return WarpedSpace::make(0.0, r_max, euclid_dim, Warp::cosh(), torus, Warp::sinh());
}

WarpedSpace filling_model_space(const WarpPair& pair, int euclid_dim, const LatticeTorus& torus) {
  return WarpedSpace::make(0.0, 1.0 + pair.lambda, euclid_dim, Warp::piecewise(pair.g), torus, Warp::piecewise(pair.f));
}

// ---------------------------------------------------------------------------
// Points

WPoint make_point(double r, std::vector<double> e, std::vector<double> theta) {
  WPoint p;
  p.r = r;
  p.e = Eigen::Map<Eigen::VectorXd>(e.data(), static_cast<Eigen::Index>(e.size()));
  p.theta = Eigen::Map<Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(theta.size()));
  return p;
}

bool is_singular(const WarpedSpace& space, const WPoint& p) {
  return space.singular_at_zero && std::abs(p.r - space.r_min) < 1e-12;
}

bool points_equal(const WarpedSpace& space, const WPoint& p, const WPoint& q, double tol) {
  if (std::abs(p.r - q.r) > tol) return false;
  if (p.e.size() != q.e.size() || (p.e - q.e).lpNorm<Eigen::Infinity>() > tol) return false;
  if (!space.torus || (is_singular(space, p) && is_singular(space, q))) return true;
  if (p.theta.size() != q.theta.size()) return false;
  for (Eigen::Index i = 0; i < p.theta.size(); ++i) {
    const double d = p.theta[i] - q.theta[i];
    if (std::abs(d - std::round(d)) > tol) return false;
  }
  return true;
}

nlohmann::json to_json(const WPoint& p) {
  return {{"r", p.r},
          {"e", std::vector<double>(p.e.data(), p.e.data() + p.e.size())},
          {"theta", std::vector<double>(p.theta.data(), p.theta.data() + p.theta.size())}};
}

WPoint point_from_json(const nlohmann::json& doc, const WarpedSpace& space, const std::string& field) {
  if (!doc.is_object()) throw Error(ErrorCode::InvalidInput, field + ": expected an object");
  if (!doc.contains("r") || !doc["r"].is_number()) throw Error(ErrorCode::InvalidInput, field + ".r: expected a number");
  auto vec = [&](const char* key, int n) {
    std::vector<double> v;
    if (doc.contains(key)) {
      if (!doc[key].is_array()) throw Error(ErrorCode::InvalidInput, field + "." + key + ": expected an array");
      for (const auto& x : doc[key]) {
        if (!x.is_number()) throw Error(ErrorCode::InvalidInput, field + "." + key + ": expected numbers");
        v.push_back(x.get<double>());
      }
    }
    if (static_cast<int>(v.size()) != n)
      throw Error(ErrorCode::InvalidInput, field + "." + key + ": expected " + std::to_string(n) + " entries");
    return v;
  };
  WPoint p = make_point(doc["r"].get<double>(), vec("e", space.euclid_dim), vec("theta", space.torus_dim()));
  if (p.r < space.r_min - 1e-12 || p.r > space.r_max + 1e-12)
    throw Error(ErrorCode::InvalidInput, field + ".r: outside the interval");
  return p;
}

// ---------------------------------------------------------------------------
// Lengths

namespace {

struct SegmentGeometry {
  double r0, dr, qe, qt;
};

SegmentGeometry segment_geometry(const WarpedSpace& space, const PolylinePath& path, std::size_t i) {
  const WPoint& a = path.vertices[i];
  const WPoint& b = path.vertices[i + 1];
  SegmentGeometry s{a.r, b.r - a.r, 0.0, 0.0};
  if (space.euclid_dim > 0) s.qe = (b.e - a.e).squaredNorm();
  if (space.torus) {
    Eigen::VectorXd dt = b.theta - a.theta;
    if (i < path.deck_shifts.size() && path.deck_shifts[i].size() == dt.size()) dt += path.deck_shifts[i].cast<double>();
    s.qt = dt.dot(space.torus->gram() * dt);
  }
  return s;
}

double segment_speed(const WarpedSpace& space, const SegmentGeometry& s, double t) {
  const double r = s.r0 + t * s.dr;
  double sq = s.dr * s.dr;
  if (s.qe > 0.0) {
    const double g = space.warp_g(r);
    sq += g * g * s.qe;
  }
  if (s.qt > 0.0) {
    const double f = space.warp_f(r);
    sq += f * f * s.qt;
  }
  return std::sqrt(sq);
}

double segment_partial_length(const WarpedSpace& space, const SegmentGeometry& s, double t) {
  if (s.dr == 0.0) return t * segment_speed(space, s, 0.0);
  return quad::adaptive([&](double x) { return segment_speed(space, s, x); }, 0.0, t, 1e-10, 1e-300);
}

void check_domain(const WarpedSpace& space, const WPoint& p) {
  if (!(p.r >= space.r_min - 1e-12 && p.r <= space.r_max + 1e-12))
    throw Error(ErrorCode::OutOfDomain, "r=" + std::to_string(p.r) + " outside the space interval");
  if (p.e.size() != space.euclid_dim || p.theta.size() != space.torus_dim())
    throw Error(ErrorCode::OutOfDomain, "point has the wrong number of coordinates");
}

}  // namespace

double segment_length(const WarpedSpace& space, const PolylinePath& path, std::size_t segment) {
  return segment_partial_length(space, segment_geometry(space, path, segment), 1.0);
}

double path_length(const WarpedSpace& space, const PolylinePath& path) {
  for (const WPoint& v : path.vertices) check_domain(space, v);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < path.vertices.size(); ++i) total += segment_length(space, path, i);
  return total;
}

WPoint point_at_arclength(const WarpedSpace& space, const PolylinePath& path, double arclength) {
  if (path.vertices.empty()) throw Error(ErrorCode::InvalidInput, "empty path");
  if (arclength < 0.0) throw Error(ErrorCode::OutOfRange, "negative arclength");
  double remaining = arclength;
  for (std::size_t i = 0; i + 1 < path.vertices.size(); ++i) {
    const SegmentGeometry s = segment_geometry(space, path, i);
    const double len = segment_partial_length(space, s, 1.0);
    if (remaining > len) {
      remaining -= len;
      continue;
    }
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60 && hi - lo > 1e-15; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (segment_partial_length(space, s, mid) < remaining)
        lo = mid;
      else
        hi = mid;
    }
    const double t = 0.5 * (lo + hi);
    const WPoint& a = path.vertices[i];
    const WPoint& b = path.vertices[i + 1];
    WPoint out;
    out.r = std::clamp(a.r + t * (b.r - a.r), space.r_min, space.r_max);
    out.e = a.e + t * (b.e - a.e);
    Eigen::VectorXd end = b.theta;
    if (i < path.deck_shifts.size() && path.deck_shifts[i].size() == end.size()) end += path.deck_shifts[i].cast<double>();
    out.theta = a.theta + t * (end - a.theta);
    for (Eigen::Index j = 0; j < out.theta.size(); ++j) out.theta[j] -= std::floor(out.theta[j]);
    return out;
  }
  if (remaining > 1e-9 * std::max(1.0, arclength)) throw Error(ErrorCode::OutOfRange, "arclength exceeds path length");
  return path.vertices.back();
}

nlohmann::json to_json(const GeodesicResult& result) {
  nlohmann::json verts = nlohmann::json::array();
  for (const WPoint& v : result.path.vertices) verts.push_back(to_json(v));
  nlohmann::json shifts = nlohmann::json::array();
  for (const Eigen::VectorXi& s : result.path.deck_shifts) shifts.push_back(std::vector<int>(s.data(), s.data() + s.size()));
  return {{"distance", result.distance},
          {"converged", result.converged},
          {"iterations", result.iterations},
          {"residual", result.residual},
          {"segments", result.segments},
          {"through_core", result.through_core},
          {"path", {{"vertices", verts}, {"deck_shifts", shifts}}}};
}

// ---------------------------------------------------------------------------
// Directions and angles

double distance_to_core(const WarpedSpace& space, const WPoint& p) {
  check_domain(space, p);
  return std::max(0.0, p.r - space.r_min);
}

SingularDirection direction_at_singular(const WarpedSpace& space, const Eigen::VectorXd& a0, const WPoint& target) {
  if (a0.size() != space.euclid_dim) throw Error(ErrorCode::InvalidInput, "a0 has the wrong dimension");
  check_domain(space, target);
  SingularDirection dir;
  dir.theta = target.theta;
  const Eigen::VectorXd delta = target.e - a0;
  const double dist = delta.norm();
  const double t1 = target.r - space.r_min;
  if (dist == 0.0) {
    dir.phi = 0.5 * std::numbers::pi;
    return dir;
  }
  dir.phi = std::atan2(std::tanh(t1), std::sinh(dist));
  dir.alpha = delta / dist;
  return dir;
}

AngleEstimate alexandrov_angle(const WarpedSpace& space, const WPoint& p, const WPoint& q1, const WPoint& q2,
                               const std::vector<double>& scales, const SolverOptions& options) {
  if (scales.empty()) throw Error(ErrorCode::InvalidInput, "scales: empty");
  for (std::size_t i = 0; i < scales.size(); ++i)
    if (!(scales[i] > 0.0) || (i > 0 && !(scales[i] < scales[i - 1])))
      throw Error(ErrorCode::InvalidInput, "scales: must be positive and decreasing");
  if (points_equal(space, p, q1) || points_equal(space, p, q2))
    throw Error(ErrorCode::InvalidInput, "angle endpoints must differ from the base point");
  const GeodesicResult g1 = solve_geodesic(space, p, q1, options);
  const GeodesicResult g2 = solve_geodesic(space, p, q2, options);
  if (!g1.converged || !g2.converged) throw Error(ErrorCode::SolverFailure, "geodesic from the base point did not converge");
  if (scales.front() > std::min(g1.distance, g2.distance))
    throw Error(ErrorCode::InvalidInput, "scales: largest scale exceeds a side length");

  AngleEstimate est;
  est.scales = scales;
  for (double t : scales) {
    const WPoint x1 = point_at_arclength(space, g1.path, t);
    const WPoint x2 = point_at_arclength(space, g2.path, t);
    const GeodesicResult g = solve_geodesic(space, x1, x2, options);
    if (!g.converged) throw Error(ErrorCode::SolverFailure, "comparison geodesic did not converge");
    est.comparison_angles.push_back(2.0 * std::asin(std::min(1.0, g.distance / (2.0 * t))));
  }
  const auto& a = est.comparison_angles;
  for (std::size_t i = 1; i < a.size(); ++i)
    if (a[i] > a[i - 1] + 1e-9) est.monotone = false;
  if (a.size() == 1) {
    est.value = a.back();
    return est;
  }
  const double ratio = scales[scales.size() - 2] / scales.back();
  const double rho2 = ratio * ratio;
  const double extrapolated = (rho2 * a.back() - a[a.size() - 2]) / (rho2 - 1.0);
  est.value = std::clamp(extrapolated, 0.0, std::numbers::pi);
  est.error_estimate = std::abs(est.value - a.back());
  return est;
}

LogResult log_map(const WarpedSpace& space, const WPoint& p, const WPoint& x, const SolverOptions& options) {
  LogResult out;
  out.singular_base = is_singular(space, p);
  if (points_equal(space, p, x)) return out;
  const GeodesicResult g = solve_geodesic(space, p, x, options);
  if (!g.converged) throw Error(ErrorCode::SolverFailure, "log map geodesic did not converge");
  out.radius = g.distance;
  if (out.singular_base) {
    out.direction = direction_at_singular(space, p.e, x);
    return out;
  }
  const WPoint& a = g.path.vertices[0];
  const WPoint& b = g.path.vertices[1];
  Eigen::VectorXd v(space.chart_dim());
  v[0] = b.r - a.r;
  if (space.euclid_dim > 0) v.segment(1, space.euclid_dim) = space.warp_g(a.r) * (b.e - a.e);
  if (space.torus) {
    Eigen::VectorXd dt = b.theta - a.theta + g.path.deck_shifts[0].cast<double>();
    v.tail(space.torus_dim()) = space.warp_f(a.r) * (space.torus->basis().transpose() * dt);
  }
  out.unit_tangent = v / v.norm();
  return out;
}

double tangent_cone_distance(const WarpedSpace& space, const LogResult& a, const LogResult& b) {
  double angle = 0.0;
  if (a.radius == 0.0 || b.radius == 0.0) return std::max(a.radius, b.radius);
  if (a.singular_base != b.singular_base) throw Error(ErrorCode::InvalidInput, "log images from different base kinds");
  if (a.singular_base) {
    auto to_join = [](const SingularDirection& d) {
      JoinPoint j;
      j.phi = d.phi;
      if (d.alpha) j.a_point.assign(d.alpha->data(), d.alpha->data() + d.alpha->size());
      j.b_point.assign(d.theta.data(), d.theta.data() + d.theta.size());
      return j;
    };
    PointMetric sphere = [](const std::vector<double>& x, const std::vector<double>& y) {
      if (x.empty() || y.empty()) return 0.0;
      double dot = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * y[i];
      return std::acos(std::clamp(dot, -1.0, 1.0));
    };
    const LatticeTorus* torus = space.torus ? &*space.torus : nullptr;
    PointMetric flat = [torus](const std::vector<double>& x, const std::vector<double>& y) {
      if (!torus || x.empty() || y.empty()) return 0.0;
      Eigen::VectorXd d(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - y[i];
      return torus->coefficient_norm(d);
    };
    angle = spherical_join_distance(to_join(a.direction), to_join(b.direction), sphere, flat);
  } else {
    angle = std::acos(std::clamp(a.unit_tangent.dot(b.unit_tangent), -1.0, 1.0));
  }
  const double sq = a.radius * a.radius + b.radius * b.radius - 2.0 * a.radius * b.radius * std::cos(angle);
  return std::sqrt(std::max(0.0, sq));
}

}  // namespace warpfill
