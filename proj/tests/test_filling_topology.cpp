#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "warpfill/error.hpp"
#include "warpfill/filling_topology.hpp"

using namespace warpfill;

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

template <class F>
Error error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e;
  }
  FAIL("expected an error");
  return Error(ErrorCode::InvalidInput, "");
}

Eigen::MatrixXi coeffs(std::initializer_list<std::initializer_list<int>> rows) {
  Eigen::MatrixXi m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (int v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

/// Square-lattice cusp of side 7 filled along the first d coordinate axes.
CuspSpec axis_cusp(int n, int d, double side = 7.0) {
  CuspSpec c;
  c.boundary_lattice = LatticeTorus::square(n, side);
  c.filling_coeffs = Eigen::MatrixXi::Zero(d, n);
  for (int i = 0; i < d; ++i) c.filling_coeffs(i, i) = 1;
  return c;
}

FillingSpec spec_of(int n, std::initializer_list<int> dims) {
  FillingSpec s;
  s.n = n;
  for (int d : dims) s.cusps.push_back(axis_cusp(n, d));
  return s;
}

CohomologyProfile profile(std::initializer_list<std::pair<int, Rank>> ranks) {
  CohomologyProfile p;
  for (const auto& [q, r] : ranks) p.set(q, r);
  return p;
}

Rank fin(long long v) { return Rank::finite(v); }
Rank inf() { return Rank::inf(); }

/// Closed form of the boundary profile: infinite rank on [n-s+1, n-1], rank 1 at n.
CohomologyProfile expected_boundary(int n, int s) {
  CohomologyProfile p;
  for (int q = n - s + 1; q <= n - 1; ++q) p.set(q, inf());
  p.set(n, fin(1));
  return p;
}

CohomologyProfile expected_group(int n, int s) {
  CohomologyProfile p;
  for (int q = n - s + 2; q <= n; ++q) p.set(q, inf());
  p.set(n + 1, fin(1));
  return p;
}

long long binomial(int k, int j) {
  if (j < 0 || j > k) return 0;
  long long r = 1;
  for (int i = 1; i <= j; ++i) r = r * (k - j + i) / i;
  return r;
}

}  // namespace

TEST_CASE("elementary divisors") {
  CHECK(elementary_divisors(coeffs({{1, 0}})) == std::vector<long long>{1});
  CHECK(elementary_divisors(coeffs({{2, 0}})) == std::vector<long long>{2});
  CHECK(elementary_divisors(coeffs({{2, 4}, {6, 8}})) == std::vector<long long>{2, 4});
  CHECK(elementary_divisors(coeffs({{1, 2, 3}, {4, 5, 6}})) == std::vector<long long>{1, 3});
  CHECK(elementary_divisors(coeffs({{2, 3}})) == std::vector<long long>{1});
  CHECK(elementary_divisors(coeffs({{1, 1}, {2, 2}})) == std::vector<long long>{1});
}

TEST_CASE("cusp validation") {
  FillingSpec ok = spec_of(3, {2});
  CHECK_NOTHROW(validate(ok));

  FillingSpec dependent = spec_of(2, {1});
  dependent.cusps[0].filling_coeffs = coeffs({{1, 0}, {2, 0}});
  CHECK(error_of([&] { validate(dependent); }).code() == ErrorCode::RankDeficient);

  FillingSpec doubled = spec_of(2, {1});
  doubled.cusps[0].filling_coeffs = coeffs({{2, 0}});
  const Error e = error_of([&] { validate(doubled); });
  CHECK(e.code() == ErrorCode::NonPrimitive);
  CHECK(std::string(e.what()).find("cusps[0].filling_coeffs") != std::string::npos);

  FillingSpec wrong_rank = spec_of(3, {1});
  wrong_rank.cusps[0].boundary_lattice = LatticeTorus::square(2, 7.0);
  CHECK(error_of([&] { validate(wrong_rank); }).code() == ErrorCode::InvalidInput);

  FillingSpec too_small;
  too_small.n = 1;
  too_small.cusps.push_back(axis_cusp(1, 1));
  CHECK(error_of([&] { validate(too_small); }).code() == ErrorCode::InvalidInput);

  FillingSpec none;
  none.n = 2;
  CHECK(error_of([&] { validate(none); }).code() == ErrorCode::InvalidInput);
}

TEST_CASE("filling spec JSON") {
  const auto doc = nlohmann::json::parse(R"({"n": 3, "cusps": [
      {"basis": [[7,0,0],[0,7,0],[0,0,7]], "filling_coeffs": [[1,0,0],[0,1,0]]},
      {"boundary_lattice": {"basis": [[8,0,0],[1,8,0],[0,0,9]]}, "filling_coeffs": [[0,0,1]]}]})");
  const FillingSpec spec = filling_from_json(doc);
  CHECK(spec.n == 3);
  REQUIRE(spec.cusps.size() == 2);
  CHECK(spec.cusps[0].filling_dim() == 2);
  CHECK(spec.cusps[1].filling_dim() == 1);
  const FillingSpec back = filling_from_json(to_json(spec));
  CHECK(to_json(back).dump() == to_json(spec).dump());

  const Error ragged = error_of([] {
    filling_from_json(nlohmann::json::parse(R"({"n":2,"cusps":[{"basis":[[7,0],[0,7]],"filling_coeffs":[[1,0],[1]]}]})"));
  });
  CHECK(std::string(ragged.what()).find("cusps[0].filling_coeffs[1]") != std::string::npos);
  const Error fractional = error_of([] {
    filling_from_json(nlohmann::json::parse(R"({"n":2,"cusps":[{"basis":[[7,0],[0,7]],"filling_coeffs":[[0.5,0]]}]})"));
  });
  CHECK(std::string(fractional.what()).find("cusps[0].filling_coeffs") != std::string::npos);
  CHECK(error_of([] { filling_from_json(nlohmann::json::parse(R"({"cusps":[]})")); }).code() == ErrorCode::InvalidInput);
  CHECK(std::string(error_of([] {
                      filling_from_json(nlohmann::json::parse(R"({"n":2,"cusps":[{"filling_coeffs":[[1,0]]}]})"));
                    }).what())
            .find("cusps[0]") != std::string::npos);
}

TEST_CASE("two pi check") {
  const TwoPiResult seven = two_pi_check(axis_cusp(2, 1, 7.0));
  CHECK(seven.systole == doctest::Approx(7.0));
  CHECK(seven.ok);
  const TwoPiResult six = two_pi_check(axis_cusp(2, 1, 6.0));
  CHECK(six.systole == doctest::Approx(6.0));
  CHECK_FALSE(six.ok);
  const TwoPiResult full = two_pi_check(axis_cusp(2, 2, 7.0));
  CHECK(full.systole == doctest::Approx(7.0));
  CHECK(full.ok);

  // Diagonal sublattice of a skewed lattice against a brute-force box.
  CuspSpec skew;
  Eigen::MatrixXd basis(2, 2);
  basis << 5.0, 0.0, 2.0, 4.5;
  skew.boundary_lattice = LatticeTorus::from_basis(basis);
  skew.filling_coeffs = coeffs({{1, 1}});
  const Eigen::MatrixXd sub = skew.filling_coeffs.cast<double>() * basis;
  CHECK(two_pi_check(skew).systole == doctest::Approx(oracle::lattice_systole_box(sub, 6)).epsilon(1e-12));
  CHECK(two_pi_check(skew).ok == (oracle::lattice_systole_box(sub, 6) > kTwoPi));
}

TEST_CASE("join cohomology examples") {
  CHECK(join_cohomology(1, 1) == profile({{2, fin(1)}}));
  CHECK(join_cohomology(1, 2) == profile({{2, fin(2)}, {3, fin(1)}}));
  CHECK(join_cohomology(2, 1) == profile({{3, fin(1)}}));
  CHECK(join_cohomology(0, 2) == profile({{1, fin(2)}, {2, fin(1)}}));
  CHECK(join_cohomology(3, 0) == profile({{2, fin(1)}}));
  CHECK(error_of([] { join_cohomology(0, 0); }).code() == ErrorCode::Empty);
}

TEST_CASE("join cohomology against simplicial joins") {
  for (int l = 0; l <= 5; ++l)
    for (int k = 0; l + k <= 5; ++k) {
      if (l == 0 && k == 0) continue;
      CAPTURE(l);
      CAPTURE(k);
      const CohomologyProfile p = join_cohomology(l, k);
      const std::map<int, int> betti = oracle::join_betti(l, k);
      CohomologyProfile brute;
      for (const auto& [q, b] : betti) brute.set(q, fin(b));
      CHECK(p == brute);

      long long euler = 0;
      for (const auto& [q, r] : p.ranks) {
        REQUIRE_FALSE(r.infinite);
        euler += (q % 2 == 0 ? 1 : -1) * r.value;
      }
      CHECK(euler == oracle::join_reduced_euler(l, k));
      for (int m = l + 1; k > 0 && m <= l + k; ++m) CHECK(p.at(m) == fin(binomial(k, m - l)));
    }
}

TEST_CASE("connect sum cohomology") {
  const CohomologyProfile s3 = sphere_profile(3);
  CHECK(connect_sum_cohomology({join_cohomology(1, 2)}, 3) == join_cohomology(1, 2));
  CHECK(connect_sum_cohomology({s3, s3}, 3) == s3);
  CHECK(connect_sum_cohomology({join_cohomology(1, 2), s3}, 3) == profile({{2, fin(2)}, {3, fin(1)}}));
  CHECK(connect_sum_cohomology({join_cohomology(1, 2), join_cohomology(1, 2)}, 3) == profile({{2, fin(4)}, {3, fin(1)}}));
  CHECK(error_of([&] { connect_sum_cohomology({s3, sphere_profile(2)}, 3); }).code() == ErrorCode::TopMismatch);
}

TEST_CASE("shell sequences") {
  SUBCASE("no cores") {
    const ShellSequence seq = shell_sequence(spec_of(3, {2}), {{}}, 3);
    REQUIRE(seq.shells.size() == 3);
    for (const auto& p : seq.shells) CHECK(p == sphere_profile(3));
    CHECK(seq.colimit == sphere_profile(3));
  }
  SUBCASE("one two-dimensional filling in a 3-torus cusp") {
    const ShellSequence seq = shell_sequence(spec_of(3, {2}), {{0}}, 2);
    REQUIRE(seq.shells.size() == 2);
    CHECK(seq.shells[0] == profile({{2, fin(2)}, {3, fin(1)}}));
    CHECK(seq.shells[1] == profile({{2, fin(4)}, {3, fin(1)}}));
    CHECK(seq.colimit == profile({{2, inf()}, {3, fin(1)}}));
  }
  SUBCASE("circle fillings of surfaces stay spheres") {
    const ShellSequence seq = shell_sequence(spec_of(2, {1, 1}), {{0, 1}}, 3);
    for (const auto& p : seq.shells) CHECK(p == sphere_profile(2));
    CHECK(seq.colimit == sphere_profile(2));
  }
  SUBCASE("ranks never decrease") {
    const FillingSpec spec = spec_of(5, {1, 2, 3, 4, 5});
    const ShellSequence seq = shell_sequence(spec, {{4}, {1, 2}, {0}, {3, 3}}, 3);
    for (std::size_t i = 1; i < seq.shells.size(); ++i)
      for (int q = 0; q <= 5; ++q) {
        const Rank a = seq.shells[i - 1].at(q), b = seq.shells[i].at(q);
        CHECK((b.infinite || (!a.infinite && b.value >= a.value)));
      }
  }
  CHECK(error_of([] { shell_sequence(spec_of(3, {2}), {}, 1); }).code() == ErrorCode::ScheduleEmpty);
  CHECK(error_of([] { shell_sequence(spec_of(3, {2}), {{1}}, 1); }).code() == ErrorCode::InvalidInput);
}

TEST_CASE("group cohomology closed form and colimits") {
  CHECK(group_cohomology(2, 1).group == profile({{3, fin(1)}}));
  CHECK(group_cohomology(3, 2).group == profile({{3, inf()}, {4, fin(1)}}));
  CHECK(group_cohomology(3, 3).group == profile({{2, inf()}, {3, inf()}, {4, fin(1)}}));
  for (int n = 2; n <= 5; ++n)
    for (int s = 1; s <= n; ++s) {
      CAPTURE(n);
      CAPTURE(s);
      const GroupCohomology gc = group_cohomology(n, s);
      CHECK(gc.s == s);
      CHECK(gc.group == expected_group(n, s));
      CHECK(gc.boundary == expected_boundary(n, s));

      // Every filling dimension up to s present, one cusp each, in both orders.
      FillingSpec spec;
      spec.n = n;
      for (int d = s; d >= 1; --d) spec.cusps.push_back(axis_cusp(n, d));
      CHECK(group_cohomology(spec).boundary == expected_boundary(n, s));
      CHECK(shell_sequence(spec, round_robin_schedule(spec), 2).colimit == expected_boundary(n, s));
      const FillingSpec only_top = spec_of(n, {s});
      CHECK(shell_sequence(only_top, round_robin_schedule(only_top, 3), 1).colimit == expected_boundary(n, s));
    }
}

TEST_CASE("round robin schedule") {
  const FillingSpec spec = spec_of(4, {2, 1, 2, 3});
  const ShellSchedule one = round_robin_schedule(spec);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == std::vector<int>{0, 1, 3});
  CHECK(round_robin_schedule(spec, 3).size() == 3);
}

TEST_CASE("classification of the worked fillings") {
  SUBCASE("surface cusps filled along circles") {
    const InvariantReport r = classify(spec_of(2, {1, 1, 1}));
    CHECK(r.flags.is_manifold);
    CHECK(r.flags.is_pd_group);
    CHECK(r.flags.cat_minus_one);
    CHECK(r.flags.isolated_flats);
    CHECK(r.flags.flat_dims_present.empty());
    CHECK(r.flags.simply_connected_at_infinity);
    CHECK(r.flags.systolic_excluded);
    CHECK(r.cohomology.group == profile({{3, fin(1)}}));
    CHECK(r.all_two_pi());
    for (const CuspInvariants& c : r.cusps) {
      CHECK(c.core_dim == 1);
      CHECK(c.torus_dim == 1);
      CHECK(c.systole == doctest::Approx(7.0));
    }
  }
  SUBCASE("one two-dimensional filling with n = 4") {
    const InvariantReport r = classify(spec_of(4, {2}));
    CHECK_FALSE(r.flags.is_manifold);
    CHECK_FALSE(r.flags.is_pd_group);
    CHECK_FALSE(r.flags.cat_minus_one);
    CHECK(r.flags.isolated_flats);
    CHECK(r.flags.flat_dims_present == std::vector<int>{2});
    CHECK(r.flags.simply_connected_at_infinity);
    CHECK(r.flags.systolic_excluded);
    CHECK(r.s == 2);
  }
  SUBCASE("point cores with n = 3") {
    const InvariantReport r = classify(spec_of(3, {3}));
    CHECK_FALSE(r.flags.is_manifold);
    CHECK_FALSE(r.flags.is_pd_group);
    CHECK(r.flags.cat_minus_one);
    CHECK(r.flags.flat_dims_present.empty());
    CHECK_FALSE(r.flags.simply_connected_at_infinity);
    CHECK_FALSE(r.flags.systolic_excluded);
    CHECK(r.cohomology.group == profile({{2, inf()}, {3, inf()}, {4, fin(1)}}));
  }
}

TEST_CASE("classification flags are consistent") {
  for (int n = 2; n <= 5; ++n)
    for (int a = 1; a <= n; ++a)
      for (int b = 1; b <= n; ++b) {
        const InvariantReport r = classify(spec_of(n, {a, b}));
        CHECK(r.flags.is_pd_group == r.flags.is_manifold);
        if (r.flags.cat_minus_one) CHECK(r.flags.flat_dims_present.empty());
        if (r.flags.is_pd_group) {
          CHECK(r.cohomology.group == profile({{n + 1, fin(1)}}));
        }
        CHECK(r.flags.systolic_excluded == r.flags.simply_connected_at_infinity);
      }
}

TEST_CASE("reports carry notes and render") {
  FillingSpec spec = spec_of(2, {1});
  spec.cusps.push_back(axis_cusp(2, 1, 6.0));
  const InvariantReport r = classify(spec);
  CHECK_FALSE(r.all_two_pi());
  CHECK_FALSE(r.cohomology.warnings.empty());
  bool assumption = false;
  for (const std::string& note : r.notes) assumption = assumption || note.find("model assumption") != std::string::npos;
  CHECK(assumption);
  const nlohmann::json j = to_json(r);
  CHECK(j["cusps"][1]["two_pi_ok"] == false);
  CHECK(j["flags"]["is_manifold"] == true);
  const std::string text = render_text(r);
  CHECK(text.find("H^") != std::string::npos);
  CHECK(text.find("manifold: yes") != std::string::npos);
}
