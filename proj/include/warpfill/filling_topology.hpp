#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "warpfill/model_spaces.hpp"

namespace warpfill {

/// Cusp cross-section: a flat n-torus and the sublattice (rows of integer
/// coefficients) spanning the filling torus.
struct CuspSpec {
  LatticeTorus boundary_lattice;
  Eigen::MatrixXi filling_coeffs;

  int filling_dim() const { return static_cast<int>(filling_coeffs.rows()); }
};

struct FillingSpec {
  int n = 2;
  std::vector<CuspSpec> cusps;
};

/// Throws INVALID_INPUT naming the field, RANK_DEFICIENT or NON_PRIMITIVE.
FillingSpec filling_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const FillingSpec& spec);
void validate(const FillingSpec& spec);

/// Nonzero diagonal of the Smith normal form.
std::vector<long long> elementary_divisors(const Eigen::MatrixXi& m);

struct TwoPiResult {
  double systole = 0.0;
  bool ok = false;
};

TwoPiResult two_pi_check(const CuspSpec& cusp);

/// Cohomology rank: a count or the symbolic infinite rank.
struct Rank {
  bool infinite = false;
  long long value = 0;

  static Rank finite(long long v) { return {false, v}; }
  static Rank inf() { return {true, 0}; }
  bool is_zero() const { return !infinite && value == 0; }
  Rank operator+(const Rank& o) const { return infinite || o.infinite ? inf() : finite(value + o.value); }
  bool operator==(const Rank& o) const { return infinite == o.infinite && (infinite || value == o.value); }
  std::string str() const { return infinite ? "INFINITE" : std::to_string(value); }
};

/// Reduced cohomology ranks by degree; absent degrees are zero.
struct CohomologyProfile {
  std::map<int, Rank> ranks;

  Rank at(int q) const;
  void set(int q, Rank r);
  int max_degree() const;
  bool operator==(const CohomologyProfile& o) const;
};

nlohmann::json to_json(const CohomologyProfile& p);

CohomologyProfile sphere_profile(int n);

/// Reduced cohomology of S^(l-1) * T^k. Throws EMPTY when l = k = 0.
CohomologyProfile join_cohomology(int l, int k);

/// Connected sum of closed top_dim-dimensional pseudomanifolds. Throws
/// TOP_MISMATCH.
CohomologyProfile connect_sum_cohomology(const std::vector<CohomologyProfile>& profiles, int top_dim);

/// Per-shell lists of cusp indices whose cores the shell swallows.
using ShellSchedule = std::vector<std::vector<int>>;

/// One core of each filling dimension present, in every shell.
ShellSchedule round_robin_schedule(const FillingSpec& spec, int shells = 1);

struct ShellSequence {
  std::vector<CohomologyProfile> shells;
  CohomologyProfile colimit;
};

/// Shell profiles starting from S^n; the schedule is repeated `repetitions`
/// times. The colimit treats the schedule as repeating forever. Throws
/// SCHEDULE_EMPTY.
ShellSequence shell_sequence(const FillingSpec& spec, const ShellSchedule& schedule, int repetitions = 1);

struct GroupCohomology {
  int s = 0;
  CohomologyProfile group;     // H^q(G; ZG)
  CohomologyProfile boundary;  // reduced Cech cohomology of the boundary
  std::vector<std::string> warnings;
};

GroupCohomology group_cohomology(const FillingSpec& spec);
/// Closed form for dimension n and largest filling dimension s.
GroupCohomology group_cohomology(int n, int s);

struct CuspInvariants {
  double systole = 0.0;
  bool two_pi_ok = false;
  int core_dim = 0;
  int torus_dim = 0;
};

struct ClassificationFlags {
  bool is_manifold = false;
  bool is_pd_group = false;
  bool cat_minus_one = false;
  bool isolated_flats = true;
  std::vector<int> flat_dims_present;
  bool simply_connected_at_infinity = false;
  bool systolic_excluded = false;
};

struct InvariantReport {
  int n = 0;
  std::vector<CuspInvariants> cusps;
  int s = 0;
  GroupCohomology cohomology;
  ClassificationFlags flags;
  std::vector<std::string> notes;

  bool all_two_pi() const;
};

InvariantReport classify(const FillingSpec& spec);
nlohmann::json to_json(const InvariantReport& report);
std::string render_text(const InvariantReport& report);

}  // namespace warpfill
