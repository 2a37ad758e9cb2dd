#include "warpfill/curvature_lab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "warpfill/error.hpp"
#include "warpfill/model_spaces.hpp"

namespace warpfill {

// ---------------------------------------------------------------------------
// Warped-product curvature terms

SectionalTerms sectional_terms(const FunctionHandle& f1, const FunctionHandle& f2, int dim1, int dim2, double t) {
  if (dim1 < 0 || dim2 < 0) throw Error(ErrorCode::InvalidInput, "factor dimensions must be >= 0");
  SectionalTerms out;
  out.t = t;
  double a0 = 1.0, a1 = 0.0, a2 = 0.0, b0 = 1.0, b1 = 0.0, b2 = 0.0;
  if (dim1 > 0) {
    a0 = f1(t, 0), a1 = f1(t, 1), a2 = f1(t, 2);
    if (!(a0 > 0.0)) throw Error(ErrorCode::NonpositiveWarp, "f1(" + std::to_string(t) + ") is not positive");
  }
  if (dim2 > 0) {
    b0 = f2(t, 0), b1 = f2(t, 1), b2 = f2(t, 2);
    if (!(b0 > 0.0)) throw Error(ErrorCode::NonpositiveWarp, "f2(" + std::to_string(t) + ") is not positive");
  }
  out.terms = {
      {"-f1''/f1", -a2 / a0, dim1 >= 1},
      {"-f2''/f2", -b2 / b0, dim2 >= 1},
      {"-(f1')^2/f1^2", -(a1 * a1) / (a0 * a0), dim1 >= 2},
      {"-(f2')^2/f2^2", -(b1 * b1) / (b0 * b0), dim2 >= 2},
      {"-f1'f2'/(f1f2)", -(a1 * b1) / (a0 * b0), dim1 >= 1 && dim2 >= 1},
  };
  out.lower = std::numeric_limits<double>::infinity();
  out.upper = -std::numeric_limits<double>::infinity();
  for (const SectionalTerm& term : out.terms) {
    if (!term.applicable) continue;
    out.lower = std::min(out.lower, term.value);
    out.upper = std::max(out.upper, term.value);
  }
  if (out.lower > out.upper) out.lower = out.upper = 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Finite-difference Riemann tensor

namespace {

using Tensor3 = std::vector<Eigen::MatrixXd>;  // [i](j, k)

Eigen::MatrixXd chart_metric(const WarpedSpace& space, const Eigen::VectorXd& x) {
  const int D = space.chart_dim();
  const int k = space.euclid_dim;
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(D, D);
  g(0, 0) = 1.0;
  if (k > 0) {
    const double w = space.warp_g(x[0]);
    g.block(1, 1, k, k) = w * w * Eigen::MatrixXd::Identity(k, k);
  }
  if (space.torus) {
    const double w = space.warp_f(x[0]);
    g.block(1 + k, 1 + k, space.torus_dim(), space.torus_dim()) = w * w * space.torus->gram();
  }
  return g;
}

constexpr double kStep = 1e-4;

// Richardson-extrapolated central difference of a matrix-valued function.
template <class F>
Eigen::MatrixXd richardson(F&& fn, const Eigen::VectorXd& x, int axis) {
  auto central = [&](double h) -> Eigen::MatrixXd {
    Eigen::VectorXd xp = x, xm = x;
    xp[axis] += h;
    xm[axis] -= h;
    return (fn(xp) - fn(xm)) / (2.0 * h);
  };
  const Eigen::MatrixXd coarse = central(kStep);
  const Eigen::MatrixXd fine = central(0.5 * kStep);
  return (4.0 * fine - coarse) / 3.0;
}

Tensor3 christoffel(const WarpedSpace& space, const Eigen::VectorXd& x) {
  const int D = space.chart_dim();
  std::vector<Eigen::MatrixXd> dg(D);  // dg[m] = d_m g
  for (int m = 0; m < D; ++m)
    dg[m] = richardson([&](const Eigen::VectorXd& y) { return chart_metric(space, y); }, x, m);
  const Eigen::MatrixXd ginv = chart_metric(space, x).inverse();
  Tensor3 gamma(D, Eigen::MatrixXd::Zero(D, D));
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j)
      for (int k = 0; k < D; ++k) {
        double s = 0.0;
        for (int l = 0; l < D; ++l) s += ginv(i, l) * (dg[j](l, k) + dg[k](l, j) - dg[l](j, k));
        gamma[i](j, k) = 0.5 * s;
      }
  return gamma;
}

}  // namespace

double fd_sectional(const WarpedSpace& space, const WPoint& point, std::array<int, 2> plane) {
  const int D = space.chart_dim();
  const int a = plane[0], b = plane[1];
  if (a < 0 || b < 0 || a >= D || b >= D || a == b)
    throw Error(ErrorCode::InvalidInput, "plane: expected two distinct chart axes below " + std::to_string(D));
  if (space.torus && space.warp_f(point.r) < 1e-8)
    throw Error(ErrorCode::SingularPoint, "torus warp vanishes at r=" + std::to_string(point.r));
  if (space.euclid_dim > 0 && space.warp_g(point.r) < 1e-8)
    throw Error(ErrorCode::SingularPoint, "euclidean warp vanishes at r=" + std::to_string(point.r));
  Eigen::VectorXd x(D);
  x[0] = point.r;
  if (space.euclid_dim > 0) x.segment(1, space.euclid_dim) = point.e;
  if (space.torus) x.tail(space.torus_dim()) = point.theta;

  const Tensor3 gamma = christoffel(space, x);
  std::vector<Tensor3> dgamma(D);  // dgamma[m][i](j, k) = d_m Gamma^i_jk
  for (int m = 0; m < D; ++m) {
    dgamma[m].resize(D);
    for (int i = 0; i < D; ++i)
      dgamma[m][i] = richardson([&](const Eigen::VectorXd& y) { return Eigen::MatrixXd(christoffel(space, y)[i]); }, x, m);
  }
  // R^i_{jkl} = d_k Gamma^i_{lj} - d_l Gamma^i_{kj} + Gamma^i_{km} Gamma^m_{lj} - Gamma^i_{lm} Gamma^m_{kj}
  auto riemann = [&](int i, int j, int k, int l) {
    double r = dgamma[k][i](l, j) - dgamma[l][i](k, j);
    for (int m = 0; m < D; ++m) r += gamma[i](k, m) * gamma[m](l, j) - gamma[i](l, m) * gamma[m](k, j);
    return r;
  };
  const Eigen::MatrixXd g = chart_metric(space, x);
  double num = 0.0;
  for (int i = 0; i < D; ++i) num += g(a, i) * riemann(i, b, a, b);
  return num / (g(a, a) * g(b, b) - g(a, b) * g(a, b));
}

// ---------------------------------------------------------------------------
// FK-convexity

FKReport fk_convexity(const std::vector<std::pair<double, double>>& samples, double K, double window, double margin) {
  FKReport rep;
  rep.K = K;
  rep.window = window;
  rep.margin = margin;
  double max_gap = 0.0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const double gap = samples[i].first - samples[i - 1].first;
    if (!(gap > 0.0)) throw Error(ErrorCode::InvalidInput, "samples: t must be strictly increasing");
    max_gap = std::max(max_gap, gap);
  }
  if (!(window > max_gap))
    throw Error(ErrorCode::WindowTooSmall, "window " + std::to_string(window) + " does not exceed the largest gap " +
                                               std::to_string(max_gap));
  const double mu = std::sqrt(std::abs(K));
  // Solution of y'' + K y = 0 with y(a) = ua, y(b) = ub.
  auto solution = [&](double a, double ua, double b, double ub, double t) {
    const double L = b - a;
    if (K == 0.0) return ua + (ub - ua) * (t - a) / L;
    if (K < 0.0) return (ua * std::sinh(mu * (b - t)) + ub * std::sinh(mu * (t - a))) / std::sinh(mu * L);
    return (ua * std::sin(mu * (b - t)) + ub * std::sin(mu * (t - a))) / std::sin(mu * L);
  };
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (std::size_t j = i + 2; j < samples.size(); ++j) {
      const auto [a, ua] = samples[i];
      const auto [b, ub] = samples[j];
      if (b - a > window) break;
      for (std::size_t m = i + 1; m < j; ++m) {
        const double deficit = samples[m].second - solution(a, ua, b, ub, samples[m].first);
        if (deficit > margin) {
          ++rep.violation_count;
          rep.max_deficit = std::max(rep.max_deficit, deficit);
          if (rep.violations.size() < 1000) rep.violations.push_back({a, b, samples[m].first, deficit});
        }
      }
    }
  }
  rep.passed = rep.violation_count == 0;
  return rep;
}

nlohmann::json to_json(const FKReport& report) {
  nlohmann::json v = nlohmann::json::array();
  for (const FKViolation& x : report.violations) v.push_back({{"a", x.a}, {"b", x.b}, {"t", x.t}, {"deficit", x.deficit}});
  return {{"K", report.K},
          {"window", report.window},
          {"margin", report.margin},
          {"violation_count", report.violation_count},
          {"max_deficit", report.max_deficit},
          {"violations", v},
          {"passed", report.passed}};
}

// ---------------------------------------------------------------------------
// CAT(kappa) comparison

namespace {

// Runs body(i) for i in [0, n) on a small thread pool; rethrows the first error.
template <class Body>
void parallel_for(int n, Body&& body) {
  const int workers = std::max(1, std::min<int>(n, static_cast<int>(std::thread::hardware_concurrency())));
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

void summarize(ComparisonReport& rep) {
  rep.worst.reset();
  rep.max_violation = -std::numeric_limits<double>::infinity();
  for (const ComparisonSample& s : rep.samples) {
    if (s.violation() > rep.max_violation) {
      rep.max_violation = s.violation();
      rep.worst = s;
    }
  }
  if (rep.samples.empty()) rep.max_violation = 0.0;
  rep.passed = rep.max_violation <= rep.tolerance;
}

double model_pair_distance(const ComparisonTriangle& tri, const ComparisonSample& s) {
  return model_distance(tri.kappa, triangle_point(tri, s.side_a, s.s_a), triangle_point(tri, s.side_b, s.s_b));
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

}  // namespace

ComparisonReport cat_test(const WarpedSpace& space, const Triangle& v, double kappa, int param_samples,
                          std::uint64_t seed, double tolerance, const SolverOptions& options) {
  if (!(kappa <= 0.0)) throw Error(ErrorCode::InvalidInput, "kappa must be <= 0");
  if (param_samples < 1) throw Error(ErrorCode::InvalidInput, "param_samples must be >= 1");
  std::array<GeodesicResult, 3> sides;
  for (int i = 0; i < 3; ++i) {
    sides[i] = solve_geodesic(space, v[i], v[(i + 1) % 3], options);
    if (!sides[i].converged) throw Error(ErrorCode::SolverFailure, "triangle side " + std::to_string(i) + " did not converge");
  }
  const ComparisonTriangle tri = comparison_triangle(kappa, sides[0].distance, sides[1].distance, sides[2].distance);
  ComparisonReport rep;
  rep.kappa = kappa;
  rep.tolerance = tolerance;
  rep.triangles_tested = 1;
  rep.triangle_sides.push_back(tri.sides);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, 2);
  for (int n = 0; n < param_samples; ++n) {
    ComparisonSample s;
    s.side_a = pick(rng);
    s.side_b = (s.side_a + 1 + pick(rng) % 2) % 3;
    s.s_a = unit(rng) * tri.sides[s.side_a];
    s.s_b = unit(rng) * tri.sides[s.side_b];
    const WPoint x = point_at_arclength(space, sides[s.side_a].path, s.s_a);
    const WPoint y = point_at_arclength(space, sides[s.side_b].path, s.s_b);
    const GeodesicResult g = solve_geodesic(space, x, y, options);
    if (!g.converged) throw Error(ErrorCode::SolverFailure, "sample geodesic did not converge");
    s.d_space = g.distance;
    s.d_model = model_pair_distance(tri, s);
    rep.samples.push_back(s);
  }
  summarize(rep);
  return rep;
}

ComparisonReport cat_campaign(const WarpedSpace& space, const std::vector<Triangle>& triangles, double kappa,
                              int samples_per_triangle, std::uint64_t seed, double tolerance,
                              const SolverOptions& options) {
  std::vector<ComparisonReport> parts(triangles.size());
  parallel_for(static_cast<int>(triangles.size()), [&](int i) {
    parts[i] = cat_test(space, triangles[i], kappa, samples_per_triangle, mix_seed(seed, i), tolerance, options);
  });
  ComparisonReport rep;
  rep.kappa = kappa;
  rep.tolerance = tolerance;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    rep.triangles_tested += 1;
    rep.triangle_sides.push_back(parts[i].triangle_sides.front());
    for (ComparisonSample s : parts[i].samples) {
      s.triangle = static_cast<int>(i);
      rep.samples.push_back(s);
    }
  }
  summarize(rep);
  return rep;
}

ComparisonReport reevaluate(const ComparisonReport& report, double kappa) {
  ComparisonReport rep = report;
  rep.kappa = kappa;
  std::vector<ComparisonTriangle> tris;
  for (const auto& sides : report.triangle_sides) tris.push_back(comparison_triangle(kappa, sides[0], sides[1], sides[2]));
  for (ComparisonSample& s : rep.samples) s.d_model = model_pair_distance(tris[s.triangle], s);
  summarize(rep);
  return rep;
}

std::vector<Triangle> sample_triangles(const WarpedSpace& space, const std::vector<double>& lo,
                                       const std::vector<double>& hi, int count, std::uint64_t seed, double min_side,
                                       double max_side, const SolverOptions& options) {
  const int D = space.chart_dim();
  if (static_cast<int>(lo.size()) != D || static_cast<int>(hi.size()) != D)
    throw Error(ErrorCode::InvalidInput, "box: expected " + std::to_string(D) + " bounds per corner");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw = [&] {
    WPoint p;
    p.e.resize(space.euclid_dim);
    p.theta.resize(space.torus_dim());
    for (int c = 0; c < D; ++c) {
      const double x = lo[c] + unit(rng) * (hi[c] - lo[c]);
      if (c == 0)
        p.r = std::clamp(x, space.r_min, space.r_max);
      else if (c <= space.euclid_dim)
        p.e[c - 1] = x;
      else
        p.theta[c - 1 - space.euclid_dim] = x - std::floor(x);
    }
    return p;
  };
  std::vector<Triangle> out;
  for (long attempts = 0; static_cast<int>(out.size()) < count; ++attempts) {
    if (attempts > 1000L * std::max(count, 1))
      throw Error(ErrorCode::InvalidInput, "could not sample triangles with the requested side bounds");
    Triangle t{draw(), draw(), draw()};
    bool ok = true;
    for (int i = 0; i < 3 && ok; ++i) {
      const double len = solve_geodesic(space, t[i], t[(i + 1) % 3], options).distance;
      ok = len >= min_side && len <= max_side;
    }
    if (ok) out.push_back(t);
  }
  return out;
}

nlohmann::json to_json(const ComparisonReport& report) {
  auto sample_json = [](const ComparisonSample& s) {
    return nlohmann::json{{"triangle", s.triangle}, {"side_a", s.side_a}, {"side_b", s.side_b},
                          {"s_a", s.s_a},           {"s_b", s.s_b},       {"d_space", s.d_space},
                          {"d_model", s.d_model},   {"violation", s.violation()}};
  };
  nlohmann::json samples = nlohmann::json::array();
  for (const ComparisonSample& s : report.samples) samples.push_back(sample_json(s));
  return {{"kappa", report.kappa},
          {"tolerance", report.tolerance},
          {"triangles_tested", report.triangles_tested},
          {"max_violation", report.max_violation},
          {"worst_case", report.worst ? sample_json(*report.worst) : nlohmann::json(nullptr)},
          {"triangle_sides", report.triangle_sides},
          {"samples", samples},
          {"passed", report.passed}};
}

// ---------------------------------------------------------------------------
// Curvature scan

CurvatureScan curvature_scan(const WarpedSpace& space, int grid, std::uint64_t seed, int spot_checks) {
  if (grid < 2) throw Error(ErrorCode::InvalidInput, "grid: need at least 2 intervals");
  CurvatureScan scan;
  const int k = space.euclid_dim;
  const int d = space.torus_dim();
  const FunctionHandle g = space.warp_g.handle();
  const FunctionHandle f = space.warp_f.handle();
  std::vector<double> knots;
  for (const Warp* w : {&space.warp_g, &space.warp_f}) {
    if (const SmoothWarpFunction* fn = w->piecewise_function()) {
      knots.insert(knots.end(), fn->knots.begin(), fn->knots.end());
      scan.delta = std::max(scan.delta, fn->delta);
    }
  }
  if (scan.delta == 0.0) scan.delta = space.r_min;

  scan.kappa_empirical = std::numeric_limits<double>::infinity();
  std::vector<int> eligible;
  for (int i = 0; i <= grid; ++i) {
    const double r = space.r_min + (space.r_max - space.r_min) * i / grid;
    if ((k > 0 && !(g(r, 0) > 0.0)) || (d > 0 && !(f(r, 0) > 0.0))) continue;
    SectionalTerms row = sectional_terms(g, f, k, d, r);
    if (r >= scan.delta - 1e-12) scan.kappa_empirical = std::min(scan.kappa_empirical, -row.upper);
    const bool near_knot = std::any_of(knots.begin(), knots.end(), [r](double t) { return std::abs(r - t) < 1e-3; });
    if (!near_knot && r > space.r_min + 1e-3 && r < space.r_max - 1e-3 && (d == 0 || f(r, 0) >= 1e-8))
      eligible.push_back(static_cast<int>(scan.rows.size()));
    scan.rows.push_back(std::move(row));
  }
  if (scan.rows.empty()) throw Error(ErrorCode::NonpositiveWarp, "no grid point has positive warps");

  bool spots_ok = true;
  const int D = space.chart_dim();
  if (D >= 2 && !eligible.empty()) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick_row(0, eligible.size() - 1);
    std::uniform_int_distribution<int> pick_axis(0, D - 1);
    for (int n = 0; n < spot_checks; ++n) {
      const SectionalTerms& row = scan.rows[eligible[pick_row(rng)]];
      int a = pick_axis(rng), b = pick_axis(rng);
      while (b == a) b = pick_axis(rng);
      SpotCheck sc;
      sc.r = row.t;
      sc.plane = {std::min(a, b), std::max(a, b)};
      WPoint p;
      p.r = row.t;
      p.e = Eigen::VectorXd::Zero(k);
      p.theta = Eigen::VectorXd::Zero(d);
      sc.fd = fd_sectional(space, p, sc.plane);
      sc.lower = row.lower;
      sc.upper = row.upper;
      sc.ok = sc.fd >= row.lower - 1e-3 && sc.fd <= row.upper + 1e-3;
      spots_ok = spots_ok && sc.ok;
      scan.spot_checks.push_back(sc);
    }
  }
  scan.passed = spots_ok && (k > 1 || scan.kappa_empirical > 0.0);
  return scan;
}

nlohmann::json to_json(const CurvatureScan& scan) {
  nlohmann::json rows = nlohmann::json::array();
  for (const SectionalTerms& row : scan.rows) {
    nlohmann::json terms = nlohmann::json::object();
    for (const SectionalTerm& t : row.terms)
      if (t.applicable) terms[t.label] = t.value;
    rows.push_back({{"r", row.t}, {"terms", terms}, {"lower", row.lower}, {"upper", row.upper}});
  }
  nlohmann::json spots = nlohmann::json::array();
  for (const SpotCheck& s : scan.spot_checks)
    spots.push_back({{"r", s.r}, {"plane", s.plane}, {"fd", s.fd}, {"lower", s.lower}, {"upper", s.upper}, {"ok", s.ok}});
  return {{"delta", scan.delta},
          {"kappa_empirical", scan.kappa_empirical},
          {"rows", rows},
          {"spot_checks", spots},
          {"passed", scan.passed}};
}

std::string to_csv(const CurvatureScan& scan) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "r";
  if (!scan.rows.empty())
    for (const SectionalTerm& t : scan.rows.front().terms) out << ',' << t.label;
  out << ",lower,upper,fd\n";
  for (const SectionalTerms& row : scan.rows) {
    out << row.t;
    for (const SectionalTerm& t : row.terms) {
      out << ',';
      if (t.applicable) out << t.value;
    }
    out << ',' << row.lower << ',' << row.upper << ',';
    for (const SpotCheck& s : scan.spot_checks)
      if (s.r == row.t) {
        out << s.fd;
        break;
      }
    out << '\n';
  }
  return out.str();
}

}  // namespace warpfill
