// Acceptance suite: one PASS/FAIL line per criterion, each checked against
// reference values computed here rather than by the library.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "warpfill/curvature_lab.hpp"
#include "warpfill/filling_topology.hpp"
#include "warpfill/model_spaces.hpp"
#include "warpfill/warp_engine.hpp"
#include "warpfill/warp_functions.hpp"

using namespace warpfill;

namespace {

struct Verdict {
  bool passed = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      passed = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double h2_distance(const WPoint& p, const WPoint& q) {
  return oracle::halfplane(oracle::horo_to_halfplane(p.r, p.e[0]), oracle::horo_to_halfplane(q.r, q.e[0]));
}

Verdict ac1_warping_functions() {
  Verdict v;
  const double lambda = 1.6;
  const WarpPair pair = build_fg(lambda, {0.2, false, std::nullopt});
  double boundary = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double below = pair.delta * i / 1000.0 * 0.999;
    boundary = std::max({boundary, std::abs(eval(pair.f, below, 0) - std::sinh(below)),
                         std::abs(eval(pair.g, below, 0) - std::cosh(below))});
    const double above = 1.0 + lambda / 2.0 + 1e-9 + (lambda / 2.0) * i / 1000.0 * 0.999;
    boundary = std::max({boundary, std::abs(eval(pair.f, above, 0) - std::exp(above - 1.0)),
                         std::abs(eval(pair.g, above, 0) - std::exp(above - 1.0))});
  }
  double mismatch = 0.0;
  for (const SmoothWarpFunction* fn : {&pair.f, &pair.g})
    for (double k : fn->knots)
      for (int order : {0, 1})
        mismatch = std::max(mismatch, std::abs(eval(*fn, k, order, Side::Left) - eval(*fn, k, order, Side::Right)));
  double f2 = INFINITY, g2 = INFINITY;
  const int n = 10000;
  for (int i = 0; i <= n; ++i) {
    const double r = (1.0 + lambda) * i / n;
    if (i > 0) f2 = std::min({f2, eval(pair.f, r, 2, Side::Left), eval(pair.f, r, 2, Side::Right)});
    g2 = std::min({g2, eval(pair.g, r, 2, Side::Left), eval(pair.g, r, 2, Side::Right)});
  }
  v.detail << "boundary_err=" << boundary << " knot_mismatch=" << mismatch << " min_f''=" << f2 << " min_g''=" << g2
           << " kappa_floor=" << pair.kappa_floor;
  v.require(boundary < 1e-12, "exact boundary pieces");
  v.require(mismatch < 1e-8, "C1 knots");
  v.require(f2 > 0.0, "f convex");
  v.require(pair.kappa_floor > 0.0 && g2 >= pair.kappa_floor, "g'' >= kappa_floor > 0");
  return v;
}

Verdict ac2_model_isometry() {
  Verdict v;
  const WarpedSpace h2 = hyperbolic_plane_space();
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  int count = 0;
  while (count < 200) {
    const WPoint p = make_point(uniform(rng, -2.0, 2.0), {uniform(rng, -3.0, 3.0)});
    const WPoint q = make_point(uniform(rng, -2.0, 2.0), {uniform(rng, -3.0, 3.0)});
    const double exact = h2_distance(p, q);
    if (exact > 5.0) continue;
    worst = std::max(worst, std::abs(solve_geodesic(h2, p, q).distance - exact));
    ++count;
  }
  v.detail << "pairs=" << count << " max_error=" << worst;
  v.require(worst <= 1e-4, "distance within 1e-4");
  return v;
}

Verdict ac3_direction_formula() {
  Verdict v;
  const WarpedSpace sing = singular_model_space(1, LatticeTorus::circle(7.0), 3.0);
  const WPoint p = make_point(0.0, {0.0}, {0.5});
  const WPoint along_core = make_point(0.0, {2.0}, {0.5});
  double worst = 0.0, formula = 0.0;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      const double t1 = 0.2 + 0.2 * i, gap = 0.2 + 0.2 * j;
      const double phi = std::atan(std::tanh(t1) / std::sinh(gap));
      const WPoint target = make_point(t1, {gap}, {0.3});
      formula = std::max(formula, std::abs(direction_at_singular(sing, p.e, target).phi - phi));
      worst = std::max(worst, std::abs(alexandrov_angle(sing, p, target, along_core).value - phi));
    }
  v.detail << "grid=25 max_angle_error=" << worst << " formula_error=" << formula;
  v.require(worst <= 1e-2, "Alexandrov angle within 1e-2");
  v.require(formula <= 1e-12, "direction formula");
  return v;
}

struct TermInterval {
  double lower = INFINITY;
  double upper = -INFINITY;
};

/// Coordinate-plane curvatures of I x_g E^k x_f T^1 at r (flat fibers).
TermInterval built_terms(const WarpPair& pair, int k, double r, Side side) {
  const double f = eval(pair.f, r, 0), f1 = eval(pair.f, r, 1), f2 = eval(pair.f, r, 2, side);
  const double g = eval(pair.g, r, 0), g1 = eval(pair.g, r, 1), g2 = eval(pair.g, r, 2, side);
  std::vector<double> terms{-f2 / f};
  if (k >= 1) terms.push_back(-g2 / g), terms.push_back(-f1 * g1 / (f * g));
  if (k >= 2) terms.push_back(-(g1 / g) * (g1 / g));
  return {*std::min_element(terms.begin(), terms.end()), *std::max_element(terms.begin(), terms.end())};
}

Verdict ac4_curvature() {
  Verdict v;
  std::mt19937_64 rng(7);
  const WarpedSpace h3 = hyperbolic_space(2, 5.0);
  const std::array<std::array<int, 2>, 3> planes{{{0, 1}, {0, 2}, {1, 2}}};
  double hyper = 0.0;
  for (int i = 0; i < 20; ++i) {
    const WPoint x = make_point(uniform(rng, -2.0, 2.0), {uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)});
    hyper = std::max(hyper, std::abs(fd_sectional(h3, x, planes[i % 3]) + 1.0));
  }
  v.require(hyper <= 1e-4, "hyperbolic fd within 1e-4");

  const WarpPair pair = build_fg(1.6);
  const WarpedSpace space = filling_model_space(pair, 1, LatticeTorus::circle(7.0));
  std::vector<double> knots = pair.f.knots;
  knots.insert(knots.end(), pair.g.knots.begin(), pair.g.knots.end());
  double outside = 0.0;
  int spots = 0;
  while (spots < 50) {
    const double r = uniform(rng, 0.05, 1.0 + pair.lambda - 0.05);
    if (std::any_of(knots.begin(), knots.end(), [r](double t) { return std::abs(r - t) < 1e-2; })) continue;
    const WPoint x = make_point(r, {uniform(rng, -1.0, 1.0)}, {uniform(rng, 0.0, 7.0)});
    const double k = fd_sectional(space, x, planes[spots % 3]);
    const TermInterval in = built_terms(pair, 1, r, Side::Right);
    outside = std::max({outside, in.lower - k, k - in.upper});
    ++spots;
  }
  v.require(outside <= 1e-3, "built fd inside term interval +- 1e-3");

  std::array<double, 2> kappa{INFINITY, INFINITY};
  for (int k : {0, 1}) {
    const int n = 4000;
    for (int i = 0; i <= n; ++i) {
      const double r = pair.delta + (1.0 + pair.lambda - pair.delta) * i / n;
      for (Side s : {Side::Left, Side::Right}) kappa[k] = std::min(kappa[k], -built_terms(pair, k, r, s).upper);
    }
  }
  v.detail << "hyperbolic_err=" << hyper << " spots=50 max_outside=" << std::max(outside, 0.0)
           << " kappa_emp(k=0)=" << kappa[0] << " kappa_emp(k=1)=" << kappa[1];
  v.require(kappa[0] > 0.0 && kappa[1] > 0.0, "empirical kappa > 0");
  return v;
}

double clamped_angle(double kappa, double a, double b, double c) {
  if (kappa == 0.0) return std::acos(std::clamp((a * a + b * b - c * c) / (2.0 * a * b), -1.0, 1.0));
  const double cs = (std::cosh(a) * std::cosh(b) - std::cosh(c)) / (std::sinh(a) * std::sinh(b));
  return std::acos(std::clamp(cs, -1.0, 1.0));
}

/// Largest d_space - d_model with d_model rebuilt from the hinge at the shared vertex.
double oracle_violation(const ComparisonReport& rep, double kappa) {
  double worst = -INFINITY;
  for (const ComparisonSample& s : rep.samples) {
    const auto& L = rep.triangle_sides[s.triangle];
    double x, y, gamma;
    if (s.side_b == (s.side_a + 1) % 3) {
      x = L[s.side_a] - s.s_a, y = s.s_b;
      gamma = clamped_angle(kappa, L[s.side_a], L[s.side_b], L[(s.side_a + 2) % 3]);
    } else {
      x = s.s_a, y = L[s.side_b] - s.s_b;
      gamma = clamped_angle(kappa, L[s.side_a], L[s.side_b], L[(s.side_a + 1) % 3]);
    }
    worst = std::max(worst, s.d_space - oracle::hinge_distance(kappa, gamma, x, y));
  }
  return worst;
}

Verdict ac5_cat() {
  Verdict v;
  const std::vector<double> lo{-1.0, -1.0}, hi{1.0, 1.0};
  const WarpedSpace h2 = hyperbolic_plane_space();
  const auto h_tris = sample_triangles(h2, lo, hi, 200, 11, 0.1, 2.0);
  const ComparisonReport hyp = cat_campaign(h2, h_tris, -1.0, 8, 11);
  double side_err = 0.0;
  for (std::size_t i = 0; i < h_tris.size(); ++i)
    for (int j = 0; j < 3; ++j)
      side_err = std::max(side_err, std::abs(hyp.triangle_sides[i][j] - h2_distance(h_tris[i][j], h_tris[i][(j + 1) % 3])));

  const WarpedSpace flat = flat_plane_space();
  const auto f_tris = sample_triangles(flat, lo, hi, 200, 12, 0.1, 2.0);
  const ComparisonReport euc = cat_campaign(flat, f_tris, 0.0, 8, 12);
  for (std::size_t i = 0; i < f_tris.size(); ++i)
    for (int j = 0; j < 3; ++j) {
      const WPoint& a = f_tris[i][j];
      const WPoint& b = f_tris[i][(j + 1) % 3];
      side_err = std::max(side_err, std::abs(euc.triangle_sides[i][j] - std::hypot(a.r - b.r, a.e[0] - b.e[0])));
    }

  const Triangle equilateral{make_point(0.0, {0.0}), make_point(1.0, {0.0}), make_point(0.5, {std::sqrt(3.0) / 2})};
  const ComparisonReport sens = cat_test(flat, equilateral, -1.0, 20, 13);

  const double hv = oracle_violation(hyp, -1.0), fv = oracle_violation(euc, 0.0), sv = oracle_violation(sens, -1.0);
  v.detail << "hyperbolic=" << hyp.triangles_tested << " max_violation=" << hv << " flat=" << euc.triangles_tested
           << " max_violation=" << fv << " equilateral_at_-1=" << sv << " side_err=" << side_err;
  v.require(hyp.triangles_tested == 200 && euc.triangles_tested == 200, "200 triangles each");
  v.require(side_err <= 1e-4, "side lengths");
  v.require(hv <= 2e-4 && hyp.passed, "hyperbolic passes kappa=-1");
  v.require(fv <= 2e-4 && euc.passed, "flat passes kappa=0");
  v.require(sv > 1e-3 && !sens.passed, "equilateral fails kappa=-1");
  return v;
}

std::vector<std::pair<double, double>> sample_along(const WarpedSpace& space, const GeodesicResult& g, int n,
                                                    const std::function<double(const WPoint&)>& u) {
  std::vector<std::pair<double, double>> out;
  for (int i = 0; i <= n; ++i) {
    const double t = g.distance * i / n;
    out.emplace_back(t, u(point_at_arclength(space, g.path, t)));
  }
  return out;
}

Verdict ac6_fk() {
  Verdict v;
  const WarpedSpace h2 = hyperbolic_plane_space();
  bool cosh_ok = true;
  for (const auto& [a, b, target] : std::vector<std::array<WPoint, 3>>{
           {make_point(-1.0, {-1.5}), make_point(1.0, {1.0}), make_point(0.5, {-0.5})},
           {make_point(0.0, {-2.0}), make_point(0.0, {2.0}), make_point(-1.0, {0.3})},
           {make_point(1.5, {0.0}), make_point(-1.5, {0.5}), make_point(0.2, {1.5})}}) {
    const GeodesicResult g = solve_geodesic(h2, a, b);
    const auto s = sample_along(h2, g, 200, [&](const WPoint& x) { return std::cosh(h2_distance(x, target)); });
    cosh_ok = cosh_ok && fk_convexity(s, -1.0, 0.1, 1e-4).passed;
  }
  v.require(cosh_ok, "cosh distance in the hyperbolic plane");

  // Distance to the core of the singular model is the radial coordinate.
  const WarpedSpace sing = singular_model_space(1, LatticeTorus::circle(7.0), 3.0);
  bool core_ok = true;
  for (const auto& [a, b] : std::vector<std::array<WPoint, 2>>{
           {make_point(0.3, {-1.0}, {0.1}), make_point(0.8, {1.2}, {0.25})},
           {make_point(0.2, {0.0}, {0.0}), make_point(0.4, {0.3}, {0.5})}}) {
    const GeodesicResult g = solve_geodesic(sing, a, b);
    const auto s = sample_along(sing, g, 200, [](const WPoint& x) { return std::sinh(x.r); });
    core_ok = core_ok && g.converged && fk_convexity(s, -1.0, 0.1, 1e-4).passed;
  }
  v.require(core_ok, "sinh distance to core in the singular model");

  std::vector<std::pair<double, double>> sine;
  for (int i = 0; i <= 300; ++i) sine.emplace_back(0.01 * i, std::sin(0.01 * i));
  const FKReport rep = fk_convexity(sine, -1.0, 0.1);
  v.detail << "sine_violations=" << rep.violation_count << " sine_max_deficit=" << rep.max_deficit;
  v.require(!rep.passed && rep.violation_count > 0 && rep.max_deficit > 0.0, "sine fails with deficits");
  return v;
}

CuspSpec axis_cusp(int n, int d) {
  CuspSpec c;
  c.boundary_lattice = LatticeTorus::square(n, 7.0);
  c.filling_coeffs = Eigen::MatrixXi::Zero(d, n);
  for (int i = 0; i < d; ++i) c.filling_coeffs(i, i) = 1;
  return c;
}

FillingSpec axis_spec(int n, std::vector<int> dims) {
  FillingSpec s;
  s.n = n;
  for (int d : dims) s.cusps.push_back(axis_cusp(n, d));
  return s;
}

Verdict ac7_cohomology() {
  Verdict v;
  int rows = 0, mismatched = 0;
  for (int n = 2; n <= 5; ++n)
    for (int s = 1; s <= n; ++s) {
      CohomologyProfile group, boundary;
      for (int q = n - s + 2; q <= n; ++q) group.set(q, Rank::inf());
      group.set(n + 1, Rank::finite(1));
      for (int q = n - s + 1; q <= n - 1; ++q) boundary.set(q, Rank::inf());
      boundary.set(n, Rank::finite(1));
      std::vector<int> dims;
      for (int d = s; d >= 1; --d) dims.push_back(d);
      const FillingSpec spec = axis_spec(n, dims);
      const GroupCohomology gc = group_cohomology(n, s);
      const GroupCohomology from_spec = group_cohomology(spec);
      const CohomologyProfile colimit = shell_sequence(spec, round_robin_schedule(spec), 2).colimit;
      ++rows;
      if (!(gc.group == group && gc.boundary == boundary && from_spec.group == group && colimit == boundary))
        ++mismatched;
    }
  const CohomologyProfile pd = group_cohomology(axis_spec(2, {1, 1})).group;
  const CohomologyProfile ms = group_cohomology(axis_spec(3, {3})).group;
  const CohomologyProfile mid = group_cohomology(axis_spec(3, {2})).group;
  const bool cases = pd.ranks.size() == 1 && pd.at(3) == Rank::finite(1) && mid.at(3).infinite && mid.at(2).is_zero() &&
                     ms.at(2).infinite && ms.at(3).infinite && ms.at(4) == Rank::finite(1);
  v.detail << "rows=" << rows << " mismatched=" << mismatched << " worked_cases=" << (cases ? "ok" : "bad");
  v.require(mismatched == 0, "closed form and colimits");
  v.require(cases, "worked cases");
  return v;
}

Verdict ac8_classification() {
  Verdict v;
  const InvariantReport surface = classify(axis_spec(2, {1, 1, 1}));
  const InvariantReport flats = classify(axis_spec(4, {2}));
  const InvariantReport points = classify(axis_spec(3, {3}));
  auto flags = [](const InvariantReport& r) {
    const ClassificationFlags& f = r.flags;
    return std::vector<bool>{f.is_manifold, f.is_pd_group, f.cat_minus_one, f.isolated_flats,
                             f.simply_connected_at_infinity, f.systolic_excluded};
  };
  v.require(flags(surface) == std::vector<bool>{true, true, true, true, true, true} && surface.flags.flat_dims_present.empty(),
            "n=2 all circles");
  v.require(flags(flats) == std::vector<bool>{false, false, false, true, true, true} &&
                flats.flags.flat_dims_present == std::vector<int>{2},
            "n=4 one 2-torus");
  v.require(flags(points) == std::vector<bool>{false, false, true, true, false, false} &&
                points.flags.flat_dims_present.empty(),
            "n=3 point cores");
  v.detail << "cases=3";
  return v;
}

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    const char* title;
    double budget_seconds;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria{
      {"AC1", "warping-function suite", 1.0, ac1_warping_functions},
      {"AC2", "horosphere model isometry", 30.0, ac2_model_isometry},
      {"AC3", "singular direction formula", 60.0, ac3_direction_formula},
      {"AC4", "curvature oracle agreement", 60.0, ac4_curvature},
      {"AC5", "CAT campaign", 300.0, ac5_cat},
      {"AC6", "FK convexity", 30.0, ac6_fk},
      {"AC7", "cohomology table", 5.0, ac7_cohomology},
      {"AC8", "classification flags", 1.0, ac8_classification},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& ex) {
      v.passed = false;
      v.detail << " [exception: " << ex.what() << "]";
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    v.require(seconds < c.budget_seconds, "runtime budget");
    if (!v.passed) ++failures;
    std::printf("%s %s %s (%.2fs / %.0fs) %s\n", c.id, v.passed ? "PASS" : "FAIL", c.title, seconds, c.budget_seconds,
                v.detail.str().c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
