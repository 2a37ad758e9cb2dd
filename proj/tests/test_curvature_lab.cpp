#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "warpfill/curvature_lab.hpp"
#include "warpfill/error.hpp"

using namespace warpfill;

namespace {

constexpr double kPi = std::numbers::pi;

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidInput;
}

FunctionHandle exp_handle() {
  return [](double t, int) { return std::exp(t); };
}

int applicable_count(const SectionalTerms& s) {
  int n = 0;
  for (const SectionalTerm& t : s.terms) n += t.applicable;
  return n;
}

bool near_any(double r, const std::vector<double>& knots, double gap) {
  for (double k : knots)
    if (std::abs(r - k) < gap) return true;
  return false;
}

}  // namespace

TEST_CASE("sectional terms of exponential warps are all -1") {
  for (auto [d1, d2] : {std::pair{1, 1}, std::pair{2, 3}, std::pair{3, 0}, std::pair{0, 2}}) {
    const SectionalTerms s = sectional_terms(exp_handle(), exp_handle(), d1, d2, 0.7);
    CHECK(s.lower == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(s.upper == doctest::Approx(-1.0).epsilon(1e-14));
    for (const SectionalTerm& t : s.terms)
      if (t.applicable) CHECK(t.value == doctest::Approx(-1.0).epsilon(1e-14));
  }
}

TEST_CASE("sectional terms follow the dimension rules") {
  const FunctionHandle ch = Warp::cosh().handle();
  const FunctionHandle sh = Warp::sinh().handle();
  const SectionalTerms s = sectional_terms(ch, sh, 1, 1, 0.5);
  CHECK(applicable_count(s) == 3);
  CHECK(s.lower == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(s.upper == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(applicable_count(sectional_terms(ch, sh, 2, 1, 0.5)) == 4);
  CHECK(applicable_count(sectional_terms(ch, sh, 2, 2, 0.5)) == 5);
  CHECK(applicable_count(sectional_terms(ch, sh, 0, 1, 0.5)) == 1);
  const SectionalTerms wide = sectional_terms(ch, sh, 2, 2, 0.5);
  CHECK(wide.lower == doctest::Approx(-1.0 / std::pow(std::tanh(0.5), 2)).epsilon(1e-12));
  CHECK(wide.upper == doctest::Approx(-std::pow(std::tanh(0.5), 2)).epsilon(1e-12));
  CHECK(code_of([&] { sectional_terms(ch, sh, 1, 1, 0.0); }) == ErrorCode::NonpositiveWarp);
  CHECK(code_of([&] { sectional_terms(ch, sh, 1, 1, -0.2); }) == ErrorCode::NonpositiveWarp);
}

TEST_CASE("finite-difference curvature of model metrics") {
  const WarpedSpace h3 = hyperbolic_space(2, 5.0);
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int i = 0; i < 20; ++i) {
    const WPoint p = make_point(u(rng), {u(rng), u(rng)});
    for (std::array<int, 2> plane : {std::array{0, 1}, std::array{0, 2}, std::array{1, 2}})
      CHECK(std::abs(fd_sectional(h3, p, plane) + 1.0) < 1e-4);
  }

  const WarpedSpace cone =
      WarpedSpace::make(0.0, 5.0, 0, Warp::constant(1.0), LatticeTorus::circle(2 * kPi), Warp::linear_r());
  CHECK(std::abs(fd_sectional(cone, make_point(1.3, {}, {0.2}), {0, 1})) < 1e-4);

  // dr^2 + (cosh(2r)/2)^2 de^2 has curvature -f''/f = -4.
  const WarpedSpace steep =
      WarpedSpace::make(-1.0, 1.0, 1, Warp::analytic(Warp::Kind::Cosh, 0.0, 2.0, 0.5), std::nullopt, Warp::constant(1.0));
  CHECK(std::abs(fd_sectional(steep, make_point(0.4, {0.0}), {0, 1}) + 4.0) < 1e-4);

  const WarpedSpace wide = hyperbolic_plane_space(2.0);
  CHECK(std::abs(fd_sectional(wide, make_point(0.3, {0.1}), {0, 1}) + 0.25) < 1e-4);

  const WarpedSpace sing = singular_model_space(1, LatticeTorus::circle(7.0), 3.0);
  CHECK(code_of([&] { fd_sectional(sing, make_point(0.0, {0.0}, {0.0}), {0, 2}); }) == ErrorCode::SingularPoint);
  CHECK(code_of([&] { fd_sectional(sing, make_point(0.5, {0.0}, {0.0}), {1, 1}); }) == ErrorCode::InvalidInput);
  CHECK(std::abs(fd_sectional(sing, make_point(0.8, {0.0}, {0.0}), {1, 2}) + 1.0) < 1e-4);
}

TEST_CASE("finite-difference curvature lies in the term interval for built warps") {
  const WarpPair pair = build_fg(1.6, {});
  std::vector<double> knots = pair.f.knots;
  knots.insert(knots.end(), pair.g.knots.begin(), pair.g.knots.end());
  const FunctionHandle g = [&pair](double r, int order) { return eval(pair.g, r, order); };
  const FunctionHandle f = [&pair](double r, int order) { return eval(pair.f, r, order); };
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto [k, torus] : {std::pair{1, LatticeTorus::circle(7.0)}, std::pair{2, LatticeTorus::square(2, 7.0)}}) {
    const WarpedSpace space = filling_model_space(pair, k, torus);
    const int D = space.chart_dim();
    int tested = 0;
    while (tested < 25) {
      const double r = 0.02 + 2.56 * u(rng);
      if (near_any(r, knots, 1e-2)) continue;
      int a = static_cast<int>(u(rng) * D), b = static_cast<int>(u(rng) * D);
      if (a == b) continue;
      ++tested;
      const SectionalTerms terms = sectional_terms(g, f, k, torus.dim(), r);
      const double fd = fd_sectional(space, make_point(r, std::vector<double>(k, 0.3), std::vector<double>(torus.dim(), 0.4)),
                                     {std::min(a, b), std::max(a, b)});
      CHECK(fd >= terms.lower - 1e-3);
      CHECK(fd <= terms.upper + 1e-3);
    }
  }
}

TEST_CASE("curvature scan of the filling model") {
  const WarpPair pair = build_fg(1.6, {});
  const CurvatureScan scan = curvature_scan(filling_model_space(pair, 1, LatticeTorus::circle(7.0)), 400, 42);
  CHECK(scan.passed);
  CHECK(scan.kappa_empirical > 0.0);
  CHECK(scan.delta == doctest::Approx(pair.delta));
  CHECK(scan.spot_checks.size() == 10);
  for (const SpotCheck& s : scan.spot_checks) CHECK(s.ok);
  for (const SectionalTerms& row : scan.rows) {
    if (row.t > 1.0 + 1.6 / 2 + 1e-9 || (row.t > 0.0 && row.t < pair.delta)) {
      for (const SectionalTerm& t : row.terms)
        if (t.applicable) CHECK(std::abs(t.value + 1.0) < 1e-10);
    }
    if (row.t >= scan.delta) CHECK(row.upper <= -scan.kappa_empirical + 1e-15);
  }
  const std::string csv = to_csv(scan);
  CHECK(csv.find("r,") == 0);
  CHECK(to_json(scan).contains("kappa_empirical"));

  const CurvatureScan wide = curvature_scan(filling_model_space(pair, 2, LatticeTorus::circle(7.0)), 100, 42);
  CHECK(wide.rows.size() == 100);
  for (const SpotCheck& s : wide.spot_checks) CHECK(s.ok);
}

TEST_CASE("fk convexity of cosh distance in the hyperbolic plane") {
  // unit-speed geodesic t -> i e^t; reference point 1 + 2i
  const std::complex<double> x(1.0, 2.0);
  std::vector<std::pair<double, double>> samples;
  for (int i = 0; i <= 400; ++i) {
    const double t = -2.0 + 0.01 * i;
    samples.emplace_back(t, std::cosh(oracle::halfplane({0.0, std::exp(t)}, x)));
  }
  const FKReport rep = fk_convexity(samples, -1.0, 0.1);
  CHECK(rep.passed);
  CHECK(rep.violations.empty());
}

TEST_CASE("fk convexity of affine and sine samples") {
  std::vector<std::pair<double, double>> affine, sine;
  for (int i = 0; i <= 100; ++i) affine.emplace_back(0.01 * i, 3.0 * 0.01 * i + 1.0);
  const FKReport flat = fk_convexity(affine, 0.0, 0.1);
  CHECK(flat.passed);
  CHECK(flat.violation_count == 0);
  CHECK_FALSE(fk_convexity(affine, 0.0, 0.1, -1e-9).passed);

  const double lo = 0.1, hi = kPi - 0.1;
  for (int i = 0; i <= 300; ++i) {
    const double t = lo + (hi - lo) * i / 300;
    sine.emplace_back(t, std::sin(t));
  }
  const FKReport bad = fk_convexity(sine, -1.0, 0.1);
  CHECK_FALSE(bad.passed);
  CHECK_FALSE(bad.violations.empty());
  CHECK(bad.violation_count >= bad.violations.size());
  CHECK(bad.max_deficit > 0.0);
  for (const FKViolation& v : bad.violations) {
    CHECK(v.deficit > 0.0);
    CHECK(v.a < v.t);
    CHECK(v.t < v.b);
  }

  CHECK(code_of([&] { fk_convexity(sine, -1.0, 0.005); }) == ErrorCode::WindowTooSmall);
}

TEST_CASE("fk convexity of sinh distance to the core along solver geodesics") {
  const WarpedSpace sing = singular_model_space(1, LatticeTorus::circle(7.0), 3.0);
  const GeodesicResult g = solve_geodesic(sing, make_point(0.3, {-1.0}, {0.1}), make_point(0.8, {1.2}, {0.25}));
  REQUIRE(g.converged);
  std::vector<std::pair<double, double>> samples;
  const int n = 200;
  for (int i = 0; i <= n; ++i) {
    const double t = g.distance * i / n;
    const WPoint x = point_at_arclength(sing, g.path, t);
    samples.emplace_back(t, std::sinh(distance_to_core(sing, x)));
  }
  CHECK(fk_convexity(samples, -1.0, 0.1, 1e-4).passed);
}

TEST_CASE("cat test in the flat chart") {
  const WarpedSpace flat = flat_plane_space();
  const Triangle tri{make_point(0.0, {0.0}), make_point(1.0, {0.2}), make_point(0.3, {1.0})};
  const ComparisonReport rep = cat_test(flat, tri, 0.0, 20, 42);
  CHECK(rep.passed);
  CHECK(std::abs(rep.max_violation) < 2e-4);
  CHECK(rep.samples.size() == 20);

  const Triangle equilateral{make_point(0.0, {0.0}), make_point(1.0, {0.0}), make_point(0.5, {std::sqrt(3.0) / 2})};
  const ComparisonReport strict = cat_test(flat, equilateral, -1.0, 20, 42);
  CHECK_FALSE(strict.passed);
  CHECK(strict.max_violation > 1e-3);
  REQUIRE(strict.worst.has_value());
  CHECK(strict.worst->violation() == doctest::Approx(strict.max_violation));
}

TEST_CASE("cat test in the hyperbolic plane") {
  const WarpedSpace h2 = hyperbolic_plane_space();
  const auto tris = sample_triangles(h2, {-1.0, -1.0}, {1.0, 1.0}, 4, 42, 0.1, 2.0);
  REQUIRE(tris.size() == 4);
  const ComparisonReport rep = cat_campaign(h2, tris, -1.0, 10, 42);
  CHECK(rep.passed);
  CHECK(rep.triangles_tested == 4);
  CHECK(rep.max_violation <= 2e-4);
  for (const auto& sides : rep.triangle_sides)
    for (double s : sides) {
      CHECK(s >= 0.1);
      CHECK(s <= 2.0);
    }

  const ComparisonReport flat = reevaluate(rep, 0.0);
  CHECK(flat.passed);
  REQUIRE(flat.samples.size() == rep.samples.size());
  for (std::size_t i = 0; i < rep.samples.size(); ++i) {
    CHECK(flat.samples[i].d_space == rep.samples[i].d_space);
    CHECK(flat.samples[i].d_model >= rep.samples[i].d_model - 1e-12);
  }
  CHECK(to_json(rep).dump() == to_json(cat_campaign(h2, tris, -1.0, 10, 42)).dump());
}
