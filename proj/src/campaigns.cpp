#include "warpfill/campaigns.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

#include "warpfill/curvature_lab.hpp"
#include "warpfill/error.hpp"
#include "warpfill/filling_topology.hpp"
#include "warpfill/model_spaces.hpp"
#include "warpfill/warp_engine.hpp"
#include "warpfill/warp_functions.hpp"

namespace warpfill {

namespace {

using nlohmann::json;

std::string num(double x) {
  std::ostringstream out;
  out << std::setprecision(17) << x;
  return out.str();
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * std::generate_canonical<double, 53>(rng);
}

std::complex<double> to_halfplane(const WPoint& p) { return {p.e[0], std::exp(-p.r)}; }

CampaignResult warp_suite(std::uint64_t) {
  CampaignResult out{1, "warping functions", {}, {}, {}};
  const double lambda = 1.6;
  const WarpPair pair = build_fg(lambda, {0.2, false, std::nullopt});
  out.results = {{"lambda", lambda}, {"delta0", pair.delta0}, {"delta", pair.delta}, {"kappa_floor", pair.kappa_floor}};
  out.checks = warp_pair_checks(pair, lambda, 10000);
  out.csv = sample_table_csv(pair, 1000);
  return out;
}

CampaignResult model_isometry(std::uint64_t seed) {
  CampaignResult out{2, "horosphere model isometry", {}, {}, {}};
  const WarpedSpace h2 = hyperbolic_plane_space();
  std::mt19937_64 rng(seed);
  std::vector<std::pair<WPoint, WPoint>> pairs;
  while (pairs.size() < 200) {
    WPoint p = make_point(uniform(rng, -2.0, 2.0), {uniform(rng, -3.0, 3.0)});
    WPoint q = make_point(uniform(rng, -2.0, 2.0), {uniform(rng, -3.0, 3.0)});
    if (halfplane_distance(to_halfplane(p), to_halfplane(q)) <= 5.0) pairs.emplace_back(std::move(p), std::move(q));
  }
  std::ostringstream csv;
  csv << "pair,r0,x0,r1,x1,solver,closed_form,error\n";
  double worst = 0.0;
  bool converged = true;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [p, q] = pairs[i];
    const GeodesicResult g = solve_geodesic(h2, p, q);
    const double exact = halfplane_distance(to_halfplane(p), to_halfplane(q));
    worst = std::max(worst, std::abs(g.distance - exact));
    converged = converged && g.converged;
    csv << i << ',' << num(p.r) << ',' << num(p.e[0]) << ',' << num(q.r) << ',' << num(q.e[0]) << ','
        << num(g.distance) << ',' << num(exact) << ',' << num(g.distance - exact) << '\n';
  }
  out.results = {{"pairs", pairs.size()}, {"max_error", worst}};
  out.checks.push_back({"solver_matches_halfplane", worst <= 1e-4, {{"max_error", worst}, {"tolerance", 1e-4}}});
  out.checks.push_back({"all_converged", converged, nullptr});
  out.csv = csv.str();
  return out;
}

CampaignResult direction_formula(std::uint64_t seed) {
  CampaignResult out{3, "singular direction formula", {}, {}, {}};
  const WarpedSpace sing = singular_model_space(1, LatticeTorus::circle(7.0), 3.0);
  SolverOptions opts;
  opts.seed = seed;
  const WPoint p = make_point(0.0, {0.0}, {0.5});
  const WPoint along_core = make_point(0.0, {2.0}, {0.5});
  std::ostringstream csv;
  csv << "t1,gap,phi,alexandrov,error\n";
  double worst = 0.0;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      const double t1 = 0.2 + 0.2 * i, gap = 0.2 + 0.2 * j;
      const WPoint target = make_point(t1, {gap}, {0.3});
      const double phi = direction_at_singular(sing, p.e, target).phi;
      const double est = alexandrov_angle(sing, p, target, along_core, {0.2, 0.1, 0.05, 0.025}, opts).value;
      worst = std::max(worst, std::abs(est - phi));
      csv << num(t1) << ',' << num(gap) << ',' << num(phi) << ',' << num(est) << ',' << num(est - phi) << '\n';
    }
  out.results = {{"grid", 25}, {"max_error", worst}};
  out.checks.push_back({"angle_matches_formula", worst <= 1e-2, {{"max_error", worst}, {"tolerance", 1e-2}}});
  out.csv = csv.str();
  return out;
}

CampaignResult curvature_oracle(std::uint64_t seed) {
  CampaignResult out{4, "curvature oracle agreement", {}, {}, {}};
  std::mt19937_64 rng(seed);
  const WarpedSpace h3 = hyperbolic_space(2, 5.0);
  const std::array<std::array<int, 2>, 3> planes{{{0, 1}, {0, 2}, {1, 2}}};
  std::ostringstream csv;
  csv << "kind,r,plane,fd,lower,upper\n";
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const WPoint x = make_point(uniform(rng, -2.0, 2.0), {uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)});
    const auto plane = planes[rng() % 3];
    const double k = fd_sectional(h3, x, plane);
    worst = std::max(worst, std::abs(k + 1.0));
    csv << "hyperbolic," << num(x.r) << ',' << plane[0] << plane[1] << ',' << num(k) << ",-1,-1\n";
  }
  out.checks.push_back({"hyperbolic_fd", worst <= 1e-4, {{"max_error", worst}, {"tolerance", 1e-4}}});

  const WarpPair pair = build_fg(1.6);
  json scans = json::array();
  bool spots = true;
  int spot_count = 0;
  for (int k : {0, 1}) {
    const WarpedSpace space = filling_model_space(pair, k, LatticeTorus::circle(7.0));
    const int checks = k == 1 ? 50 : 25;
    const CurvatureScan scan = curvature_scan(space, 400, seed + k, checks);
    for (const SpotCheck& s : scan.spot_checks) {
      spots = spots && s.ok;
      ++spot_count;
      csv << "built_k" << k << ',' << num(s.r) << ',' << s.plane[0] << s.plane[1] << ',' << num(s.fd) << ','
          << num(s.lower) << ',' << num(s.upper) << '\n';
    }
    scans.push_back({{"euclid_dim", k}, {"kappa_empirical", scan.kappa_empirical}, {"delta", scan.delta}});
    out.checks.push_back({"kappa_positive_k" + std::to_string(k), scan.kappa_empirical > 0.0,
                          {{"kappa_empirical", scan.kappa_empirical}}});
  }
  out.checks.push_back({"built_spot_checks", spots, {{"count", spot_count}, {"slack", 1e-3}}});
  out.results = {{"hyperbolic_max_error", worst}, {"built", scans}};
  out.csv = csv.str();
  return out;
}

CampaignResult cat_campaigns(std::uint64_t seed) {
  CampaignResult out{5, "CAT comparison", {}, {}, {}};
  SolverOptions opts;
  opts.seed = seed;
  const WarpedSpace h2 = hyperbolic_plane_space();
  const WarpedSpace flat = flat_plane_space();
  const std::vector<double> lo{-1.0, -1.0}, hi{1.0, 1.0};
  const ComparisonReport hyp =
      cat_campaign(h2, sample_triangles(h2, lo, hi, 200, seed, 0.1, 2.0, opts), -1.0, 8, seed, 2e-4, opts);
  const ComparisonReport euc =
      cat_campaign(flat, sample_triangles(flat, lo, hi, 200, seed + 1, 0.1, 2.0, opts), 0.0, 8, seed, 2e-4, opts);
  const Triangle equilateral{make_point(0.0, {0.0}), make_point(1.0, {0.0}), make_point(0.5, {std::sqrt(3.0) / 2})};
  const ComparisonReport sens = cat_test(flat, equilateral, -1.0, 20, seed, 2e-4, opts);
  out.checks.push_back({"hyperbolic_kappa_minus_one", hyp.passed && hyp.triangles_tested == 200,
                        {{"triangles", hyp.triangles_tested}, {"max_violation", hyp.max_violation}}});
  out.checks.push_back({"flat_kappa_zero", euc.passed && euc.triangles_tested == 200,
                        {{"triangles", euc.triangles_tested}, {"max_violation", euc.max_violation}}});
  out.checks.push_back({"equilateral_fails_kappa_minus_one", !sens.passed && sens.max_violation > 1e-3,
                        {{"max_violation", sens.max_violation}}});
  out.results = {{"hyperbolic", to_json(hyp)}, {"flat", to_json(euc)}, {"equilateral", to_json(sens)}};
  std::ostringstream csv;
  csv << "campaign,triangle,side_a,side_b,s_a,s_b,d_space,d_model,violation\n";
  for (const auto& [name, rep] : {std::pair<const char*, const ComparisonReport*>{"hyperbolic", &hyp},
                                  {"flat", &euc}, {"equilateral", &sens}})
    for (const ComparisonSample& s : rep->samples)
      csv << name << ',' << s.triangle << ',' << s.side_a << ',' << s.side_b << ',' << num(s.s_a) << ',' << num(s.s_b)
          << ',' << num(s.d_space) << ',' << num(s.d_model) << ',' << num(s.violation()) << '\n';
  out.csv = csv.str();
  return out;
}

std::vector<std::pair<double, double>> along(const WarpedSpace& space, const GeodesicResult& g, int n,
                                             const std::function<double(const WPoint&)>& u) {
  std::vector<std::pair<double, double>> samples(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double t = g.distance * i / n;
    samples[i] = {t, u(point_at_arclength(space, g.path, t))};
  }
  return samples;
}

CampaignResult fk_campaign(std::uint64_t seed) {
  CampaignResult out{6, "FK convexity", {}, {}, {}};
  SolverOptions opts;
  opts.seed = seed;
  std::ostringstream csv;
  csv << "case,t,u\n";
  auto emit = [&csv](const std::string& name, const std::vector<std::pair<double, double>>& s) {
    for (const auto& [t, u] : s) csv << name << ',' << num(t) << ',' << num(u) << '\n';
  };

  const WarpedSpace h2 = hyperbolic_plane_space();
  const std::array<std::array<WPoint, 3>, 3> cosh_cases{{
      {make_point(-1.0, {-1.5}), make_point(1.0, {1.0}), make_point(0.5, {-0.5})},
      {make_point(0.0, {-2.0}), make_point(0.0, {2.0}), make_point(-1.0, {0.3})},
      {make_point(1.5, {0.0}), make_point(-1.5, {0.5}), make_point(0.2, {1.5})},
  }};
  json cosh_reports = json::array();
  bool cosh_ok = true;
  for (std::size_t i = 0; i < cosh_cases.size(); ++i) {
    const auto& [a, b, target] = cosh_cases[i];
    const GeodesicResult g = solve_geodesic(h2, a, b, opts);
    const auto s = along(h2, g, 100, [&](const WPoint& x) { return std::cosh(solve_geodesic(h2, x, target, opts).distance); });
    const FKReport rep = fk_convexity(s, -1.0, 0.1, 1e-4);
    cosh_ok = cosh_ok && rep.passed && g.converged;
    cosh_reports.push_back(to_json(rep));
    emit("cosh_distance_" + std::to_string(i), s);
  }
  out.checks.push_back({"cosh_distance_hyperbolic", cosh_ok, nullptr});

  const WarpedSpace sing = singular_model_space(1, LatticeTorus::circle(7.0), 3.0);
  const std::array<std::array<WPoint, 2>, 2> core_cases{{
      {make_point(0.3, {-1.0}, {0.1}), make_point(0.8, {1.2}, {0.25})},
      {make_point(0.2, {0.0}, {0.0}), make_point(0.4, {0.3}, {0.5})},
  }};
  json core_reports = json::array();
  bool core_ok = true;
  for (std::size_t i = 0; i < core_cases.size(); ++i) {
    const GeodesicResult g = solve_geodesic(sing, core_cases[i][0], core_cases[i][1], opts);
    const auto s = along(sing, g, 200, [&](const WPoint& x) { return std::sinh(distance_to_core(sing, x)); });
    const FKReport rep = fk_convexity(s, -1.0, 0.1, 1e-4);
    core_ok = core_ok && rep.passed && g.converged;
    core_reports.push_back(to_json(rep));
    emit("sinh_core_" + std::to_string(i), s);
  }
  out.checks.push_back({"sinh_core_singular", core_ok, nullptr});

  std::vector<std::pair<double, double>> sine;
  for (int i = 0; i <= 300; ++i) sine.emplace_back(0.01 * i, std::sin(0.01 * i));
  const FKReport sine_rep = fk_convexity(sine, -1.0, 0.1);
  emit("sine", sine);
  out.checks.push_back({"sine_fails_with_deficits", !sine_rep.passed && sine_rep.violation_count > 0,
                        {{"violations", sine_rep.violation_count}, {"max_deficit", sine_rep.max_deficit}}});
  out.results = {{"cosh_distance", cosh_reports}, {"sinh_core", core_reports}, {"sine", to_json(sine_rep)}};
  out.csv = csv.str();
  return out;
}

CuspSpec axis_cusp(int n, int d) {
  CuspSpec c;
  c.boundary_lattice = LatticeTorus::square(n, 7.0);
  c.filling_coeffs = Eigen::MatrixXi::Zero(d, n);
  for (int i = 0; i < d; ++i) c.filling_coeffs(i, i) = 1;
  return c;
}

FillingSpec axis_spec(int n, const std::vector<int>& dims) {
  FillingSpec s;
  s.n = n;
  for (int d : dims) s.cusps.push_back(axis_cusp(n, d));
  return s;
}

CampaignResult cohomology_table(std::uint64_t) {
  CampaignResult out{7, "cohomology table", json::array(), {}, {}};
  std::ostringstream csv;
  csv << "n,s,q,group,boundary,colimit\n";
  bool formula = true, colimits = true;
  for (int n = 2; n <= 5; ++n)
    for (int s = 1; s <= n; ++s) {
      CohomologyProfile group, boundary;
      for (int q = n - s + 2; q <= n; ++q) group.set(q, Rank::inf());
      group.set(n + 1, Rank::finite(1));
      for (int q = n - s + 1; q <= n - 1; ++q) boundary.set(q, Rank::inf());
      boundary.set(n, Rank::finite(1));
      const GroupCohomology closed = group_cohomology(n, s);
      std::vector<int> dims(static_cast<std::size_t>(s));
      for (int d = 1; d <= s; ++d) dims[d - 1] = d;
      const FillingSpec spec = axis_spec(n, dims);
      const GroupCohomology from_spec = group_cohomology(spec);
      const CohomologyProfile colimit = shell_sequence(spec, round_robin_schedule(spec), 2).colimit;
      const bool row_formula = closed.group == group && closed.boundary == boundary && from_spec.group == group &&
                               from_spec.boundary == boundary;
      formula = formula && row_formula;
      colimits = colimits && colimit == boundary;
      out.results.push_back({{"n", n}, {"s", s}, {"group", to_json(closed.group)}, {"boundary", to_json(closed.boundary)},
                             {"colimit", to_json(colimit)}, {"formula_ok", row_formula}});
      for (int q = 0; q <= n + 1; ++q)
        csv << n << ',' << s << ',' << q << ',' << closed.group.at(q).str() << ',' << closed.boundary.at(q).str() << ','
            << colimit.at(q).str() << '\n';
    }
  const bool pd = group_cohomology(axis_spec(2, {1, 1})).group == group_cohomology(2, 1).group &&
                  group_cohomology(2, 1).group.ranks.size() == 1;
  const bool n3s2 = group_cohomology(axis_spec(3, {2})).group.at(3).infinite;
  const CohomologyProfile ms = group_cohomology(axis_spec(3, {3})).group;
  const bool n3s3 = ms.at(2).infinite && ms.at(3).infinite && ms.at(4) == Rank::finite(1);
  out.checks.push_back({"closed_form", formula, nullptr});
  out.checks.push_back({"round_robin_colimits", colimits, nullptr});
  out.checks.push_back({"worked_cases", pd && n3s2 && n3s3, {{"n2_s1", pd}, {"n3_s2", n3s2}, {"n3_s3", n3s3}}});
  out.csv = csv.str();
  return out;
}

CampaignResult classification(std::uint64_t) {
  CampaignResult out{8, "classification flags", json::array(), {}, {}};
  struct Case {
    std::string name;
    FillingSpec spec;
    bool manifold, pd, cat, sc_inf, systolic;
    std::vector<int> flats;
  };
  const std::vector<Case> cases{
      {"n2_all_d1", axis_spec(2, {1, 1, 1}), true, true, true, true, true, {}},
      {"n4_one_d2", axis_spec(4, {2}), false, false, false, true, true, {2}},
      {"n3_one_d3", axis_spec(3, {3}), false, false, true, false, false, {}},
  };
  std::ostringstream csv;
  csv << "case,is_manifold,is_pd_group,cat_minus_one,isolated_flats,flat_dims,simply_connected_at_infinity,"
         "systolic_excluded\n";
  for (const Case& c : cases) {
    const InvariantReport r = classify(c.spec);
    const ClassificationFlags& f = r.flags;
    const bool ok = f.is_manifold == c.manifold && f.is_pd_group == c.pd && f.cat_minus_one == c.cat &&
                    f.isolated_flats && f.flat_dims_present == c.flats &&
                    f.simply_connected_at_infinity == c.sc_inf && f.systolic_excluded == c.systolic;
    out.checks.push_back({c.name, ok, to_json(r)["flags"]});
    out.results.push_back({{"case", c.name}, {"report", to_json(r)}});
    csv << c.name << ',' << f.is_manifold << ',' << f.is_pd_group << ',' << f.cat_minus_one << ',' << f.isolated_flats
        << ',';
    for (std::size_t i = 0; i < f.flat_dims_present.size(); ++i) csv << (i ? ";" : "") << f.flat_dims_present[i];
    csv << ',' << f.simply_connected_at_infinity << ',' << f.systolic_excluded << '\n';
  }
  out.csv = csv.str();
  return out;
}

}  // namespace

bool CampaignResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CampaignCheck& c) { return c.passed; });
}

std::vector<CampaignCheck> warp_pair_checks(const WarpPair& pair, double lambda, int grid) {
  double mismatch = 0.0;
  for (const SmoothWarpFunction* fn : {&pair.f, &pair.g})
    for (double k : fn->knots)
      for (int order : {0, 1})
        mismatch = std::max(mismatch, std::abs(eval(*fn, k, order, Side::Left) - eval(*fn, k, order, Side::Right)));

  const double top = 1.0 + lambda;
  double f2_min = INFINITY, g2_min = INFINITY, boundary_err = 0.0;
  for (int i = 0; i <= grid; ++i) {
    const double r = top * i / grid;
    if (i > 0) f2_min = std::min(f2_min, eval(pair.f, r, 2));
    g2_min = std::min({g2_min, eval(pair.g, r, 2, Side::Left), eval(pair.g, r, 2, Side::Right)});
    if (r < pair.delta) {
      boundary_err = std::max(boundary_err, std::abs(eval(pair.f, r, 0) - std::sinh(r)));
      boundary_err = std::max(boundary_err, std::abs(eval(pair.g, r, 0) - std::cosh(r)));
    } else if (r > 1.0 + lambda / 2.0) {
      boundary_err = std::max(boundary_err, std::abs(eval(pair.f, r, 0) - std::exp(r - 1.0)));
      boundary_err = std::max(boundary_err, std::abs(eval(pair.g, r, 0) - std::exp(r - 1.0)));
    }
  }
  return {
      {"c1_knot_mismatch", mismatch < 1e-8, {{"max", mismatch}}},
      {"exact_boundary_pieces", boundary_err <= 1e-12, {{"max_error", boundary_err}}},
      {"f_convex", f2_min > 0.0, {{"grid_min", f2_min}, {"grid", grid}}},
      {"g_above_kappa_floor", g2_min >= pair.kappa_floor && pair.kappa_floor > 0.0,
       {{"grid_min", g2_min}, {"kappa_floor", pair.kappa_floor}}},
  };
}

CampaignResult run_campaign(int id, std::uint64_t seed) {
  switch (id) {
    case 1: return warp_suite(seed);
    case 2: return model_isometry(seed);
    case 3: return direction_formula(seed);
    case 4: return curvature_oracle(seed);
    case 5: return cat_campaigns(seed);
    case 6: return fk_campaign(seed);
    case 7: return cohomology_table(seed);
    case 8: return classification(seed);
    default: throw Error(ErrorCode::InvalidInput, "campaign id: expected 1.." + std::to_string(kCampaignCount));
  }
}

nlohmann::json to_json(const CampaignResult& result) {
  json checks = json::array();
  for (const CampaignCheck& c : result.checks) {
    json j = {{"name", c.name}, {"passed", c.passed}};
    if (!c.detail.is_null()) j["detail"] = c.detail;
    checks.push_back(std::move(j));
  }
  return {{"id", result.id}, {"title", result.title}, {"results", result.results}, {"checks", checks},
          {"passed", result.passed()}};
}

}  // namespace warpfill
