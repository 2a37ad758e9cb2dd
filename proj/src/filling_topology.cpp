#include "warpfill/filling_topology.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <set>
#include <sstream>

#include "warpfill/error.hpp"

namespace warpfill {

// ---------------------------------------------------------------------------
// Integer normal form

std::vector<long long> elementary_divisors(const Eigen::MatrixXi& input) {
  using Row = std::vector<long long>;
  std::vector<Row> a(input.rows(), Row(input.cols()));
  for (Eigen::Index i = 0; i < input.rows(); ++i)
    for (Eigen::Index j = 0; j < input.cols(); ++j) a[i][j] = input(i, j);
  const int rows = static_cast<int>(input.rows());
  const int cols = static_cast<int>(input.cols());
  std::vector<long long> out;
  for (int t = 0; t < std::min(rows, cols); ++t) {
    while (true) {
      // Smallest nonzero entry of the trailing block becomes the pivot.
      int pi = -1, pj = -1;
      for (int i = t; i < rows; ++i)
        for (int j = t; j < cols; ++j)
          if (a[i][j] != 0 && (pi < 0 || std::llabs(a[i][j]) < std::llabs(a[pi][pj]))) pi = i, pj = j;
      if (pi < 0) return out;
      std::swap(a[t], a[pi]);
      for (auto& row : a) std::swap(row[t], row[pj]);
      bool clean = true;
      for (int i = t + 1; i < rows; ++i) {
        const long long q = a[i][t] / a[t][t];
        for (int j = t; j < cols; ++j) a[i][j] -= q * a[t][j];
        clean = clean && a[i][t] == 0;
      }
      for (int j = t + 1; j < cols; ++j) {
        const long long q = a[t][j] / a[t][t];
        for (int i = t; i < rows; ++i) a[i][j] -= q * a[i][t];
        clean = clean && a[t][j] == 0;
      }
      if (!clean) continue;
      // Pivot must divide the rest of the block; otherwise fold in an offending row.
      int bad = -1;
      for (int i = t + 1; i < rows && bad < 0; ++i)
        for (int j = t + 1; j < cols; ++j)
          if (a[i][j] % a[t][t] != 0) {
            bad = i;
            break;
          }
      if (bad < 0) break;
      for (int j = t; j < cols; ++j) a[t][j] += a[bad][j];
    }
    out.push_back(std::llabs(a[t][t]));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Specs

namespace {

void validate_cusp(const CuspSpec& cusp, int n, const std::string& field) {
  if (cusp.boundary_lattice.dim() != n)
    throw Error(ErrorCode::InvalidInput, field + ".basis: lattice rank must equal n=" + std::to_string(n));
  const int d = cusp.filling_dim();
  if (d < 1 || d > n || cusp.filling_coeffs.cols() != n)
    throw Error(ErrorCode::InvalidInput, field + ".filling_coeffs: expected d x " + std::to_string(n) + " with 1 <= d <= n");
  const std::vector<long long> divisors = elementary_divisors(cusp.filling_coeffs);
  if (static_cast<int>(divisors.size()) < d)
    throw Error(ErrorCode::RankDeficient, field + ".filling_coeffs: rows are linearly dependent");
  for (long long e : divisors)
    if (e != 1)
      throw Error(ErrorCode::NonPrimitive, field + ".filling_coeffs: sublattice is not primitive (elementary divisor " +
                                               std::to_string(e) + ")");
}

}  // namespace

void validate(const FillingSpec& spec) {
  if (spec.n < 2) throw Error(ErrorCode::InvalidInput, "n: must be >= 2");
  if (spec.cusps.empty()) throw Error(ErrorCode::InvalidInput, "cusps: need at least one cusp");
  for (std::size_t i = 0; i < spec.cusps.size(); ++i)
    validate_cusp(spec.cusps[i], spec.n, "cusps[" + std::to_string(i) + "]");
}

FillingSpec filling_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::InvalidInput, "spec: expected an object");
  if (!doc.contains("n") || !doc["n"].is_number_integer()) throw Error(ErrorCode::InvalidInput, "n: expected an integer");
  if (!doc.contains("cusps") || !doc["cusps"].is_array()) throw Error(ErrorCode::InvalidInput, "cusps: expected an array");
  FillingSpec spec;
  spec.n = doc["n"].get<int>();
  for (std::size_t i = 0; i < doc["cusps"].size(); ++i) {
    const auto& c = doc["cusps"][i];
    const std::string field = "cusps[" + std::to_string(i) + "]";
    CuspSpec cusp;
    try {
      cusp.boundary_lattice = lattice_from_json(c.contains("boundary_lattice") ? c["boundary_lattice"] : c);
    } catch (const Error& ex) {
      throw Error(ErrorCode::InvalidInput, field + "." + ex.what());
    }
    if (!c.contains("filling_coeffs") || !c["filling_coeffs"].is_array() || c["filling_coeffs"].empty())
      throw Error(ErrorCode::InvalidInput, field + ".filling_coeffs: expected a non-empty array of rows");
    const auto& rows = c["filling_coeffs"];
    const int cols = rows[0].is_array() ? static_cast<int>(rows[0].size()) : 0;
    cusp.filling_coeffs.resize(static_cast<Eigen::Index>(rows.size()), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (!rows[r].is_array() || static_cast<int>(rows[r].size()) != cols)
        throw Error(ErrorCode::InvalidInput, field + ".filling_coeffs[" + std::to_string(r) + "]: ragged row");
      for (int j = 0; j < cols; ++j) {
        if (!rows[r][j].is_number_integer())
          throw Error(ErrorCode::InvalidInput, field + ".filling_coeffs[" + std::to_string(r) + "]: expected integers");
        cusp.filling_coeffs(static_cast<Eigen::Index>(r), j) = rows[r][j].get<int>();
      }
    }
    spec.cusps.push_back(std::move(cusp));
  }
  validate(spec);
  return spec;
}

nlohmann::json to_json(const FillingSpec& spec) {
  nlohmann::json cusps = nlohmann::json::array();
  for (const CuspSpec& c : spec.cusps) {
    nlohmann::json j = to_json(c.boundary_lattice);
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < c.filling_coeffs.rows(); ++r) {
      std::vector<int> row(c.filling_coeffs.cols());
      for (Eigen::Index k = 0; k < c.filling_coeffs.cols(); ++k) row[k] = c.filling_coeffs(r, k);
      rows.push_back(row);
    }
    j["filling_coeffs"] = rows;
    cusps.push_back(j);
  }
  return {{"n", spec.n}, {"cusps", cusps}};
}

TwoPiResult two_pi_check(const CuspSpec& cusp) {
  const Eigen::MatrixXd C = cusp.filling_coeffs.cast<double>();
  if (C.rows() < 1 || C.cols() != cusp.boundary_lattice.dim())
    throw Error(ErrorCode::InvalidInput, "filling_coeffs: shape does not match the lattice");
  if (static_cast<Eigen::Index>(elementary_divisors(cusp.filling_coeffs).size()) < C.rows())
    throw Error(ErrorCode::RankDeficient, "filling_coeffs: rows are linearly dependent");
  const Eigen::MatrixXd gram = C * cusp.boundary_lattice.gram() * C.transpose();
  TwoPiResult out;
  out.systole = torus_systole(LatticeTorus::from_gram(gram));
  out.ok = out.systole > 2.0 * std::numbers::pi;
  return out;
}

// ---------------------------------------------------------------------------
// Cohomology profiles

Rank CohomologyProfile::at(int q) const {
  const auto it = ranks.find(q);
  return it == ranks.end() ? Rank{} : it->second;
}

void CohomologyProfile::set(int q, Rank r) {
  if (r.is_zero())
    ranks.erase(q);
  else
    ranks[q] = r;
}

int CohomologyProfile::max_degree() const { return ranks.empty() ? -1 : ranks.rbegin()->first; }

bool CohomologyProfile::operator==(const CohomologyProfile& o) const {
  if (ranks.size() != o.ranks.size()) return false;
  for (const auto& [q, r] : ranks)
    if (!(o.at(q) == r)) return false;
  return true;
}

nlohmann::json to_json(const CohomologyProfile& p) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [q, r] : p.ranks) {
    if (r.infinite)
      j[std::to_string(q)] = "INFINITE";
    else
      j[std::to_string(q)] = r.value;
  }
  return j;
}

CohomologyProfile sphere_profile(int n) {
  CohomologyProfile p;
  p.set(n, Rank::finite(1));
  return p;
}

namespace {

long long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long out = 1;
  for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
  return out;
}

}  // namespace

CohomologyProfile join_cohomology(int l, int k) {
  if (l < 0 || k < 0) throw Error(ErrorCode::InvalidInput, "join dimensions must be >= 0");
  if (l == 0 && k == 0) throw Error(ErrorCode::Empty, "join of two empty spaces");
  if (k == 0) return sphere_profile(l - 1);
  // Joining with S^(l-1) is an l-fold suspension of T^k.
  CohomologyProfile p;
  for (int j = 1; j <= k; ++j) p.set(l + j, Rank::finite(binomial(k, j)));
  return p;
}

CohomologyProfile connect_sum_cohomology(const std::vector<CohomologyProfile>& profiles, int top_dim) {
  if (profiles.empty()) throw Error(ErrorCode::InvalidInput, "connect sum of nothing");
  CohomologyProfile out;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const CohomologyProfile& p = profiles[i];
    if (!(p.at(top_dim) == Rank::finite(1)) || p.max_degree() > top_dim)
      throw Error(ErrorCode::TopMismatch, "summand " + std::to_string(i) + " is not a closed " +
                                              std::to_string(top_dim) + "-dimensional pseudomanifold");
    for (const auto& [q, r] : p.ranks)
      if (q < top_dim) out.set(q, out.at(q) + r);
  }
  out.set(top_dim, Rank::finite(1));
  return out;
}

ShellSchedule round_robin_schedule(const FillingSpec& spec, int shells) {
  std::vector<int> shell;
  std::set<int> seen;
  for (std::size_t i = 0; i < spec.cusps.size(); ++i)
    if (seen.insert(spec.cusps[i].filling_dim()).second) shell.push_back(static_cast<int>(i));
  return ShellSchedule(std::max(shells, 1), shell);
}

ShellSequence shell_sequence(const FillingSpec& spec, const ShellSchedule& schedule, int repetitions) {
  if (schedule.empty()) throw Error(ErrorCode::ScheduleEmpty, "schedule has no shells");
  if (repetitions < 1) throw Error(ErrorCode::InvalidInput, "repetitions must be >= 1");
  const int n = spec.n;
  std::vector<CohomologyProfile> cores;
  for (std::size_t i = 0; i < schedule.size(); ++i)
    for (int c : schedule[i])
      if (c < 0 || c >= static_cast<int>(spec.cusps.size()))
        throw Error(ErrorCode::InvalidInput, "schedule[" + std::to_string(i) + "]: cusp index " + std::to_string(c) +
                                                 " out of range");
  ShellSequence seq;
  CohomologyProfile current = sphere_profile(n);
  std::set<int> growing;
  for (int rep = 0; rep < repetitions; ++rep) {
    for (const auto& shell : schedule) {
      std::vector<CohomologyProfile> parts{current};
      for (int c : shell) {
        const int d = spec.cusps[c].filling_dim();
        parts.push_back(join_cohomology(n - d, d));
        for (const auto& [q, r] : parts.back().ranks)
          if (q < n && !r.is_zero()) growing.insert(q);
      }
      current = connect_sum_cohomology(parts, n);
      seq.shells.push_back(current);
    }
  }
  seq.colimit = current;
  for (int q : growing) seq.colimit.set(q, Rank::inf());
  return seq;
}

GroupCohomology group_cohomology(int n, int s) {
  if (n < 2 || s < 1 || s > n) throw Error(ErrorCode::InvalidInput, "need n >= 2 and 1 <= s <= n");
  GroupCohomology out;
  out.s = s;
  for (int q = n - s + 2; q <= n; ++q) out.group.set(q, Rank::inf());
  out.group.set(n + 1, Rank::finite(1));
  for (int q = n - s + 1; q <= n - 1; ++q) out.boundary.set(q, Rank::inf());
  out.boundary.set(n, Rank::finite(1));
  return out;
}

GroupCohomology group_cohomology(const FillingSpec& spec) {
  validate(spec);
  int s = 0;
  for (const CuspSpec& c : spec.cusps) s = std::max(s, c.filling_dim());
  GroupCohomology out = group_cohomology(spec.n, s);
  for (std::size_t i = 0; i < spec.cusps.size(); ++i)
    if (!two_pi_check(spec.cusps[i]).ok)
      out.warnings.push_back("cusp " + std::to_string(i) + " is not a 2pi-filling; the table assumes it is");
  return out;
}

// ---------------------------------------------------------------------------
// Classification

bool InvariantReport::all_two_pi() const {
  return std::all_of(cusps.begin(), cusps.end(), [](const CuspInvariants& c) { return c.two_pi_ok; });
}

InvariantReport classify(const FillingSpec& spec) {
  validate(spec);
  InvariantReport rep;
  rep.n = spec.n;
  const int n = spec.n;
  bool all_one = true, all_codim_small = true, any_full = false;
  std::set<int> flats;
  for (const CuspSpec& c : spec.cusps) {
    const TwoPiResult tp = two_pi_check(c);
    const int d = c.filling_dim();
    rep.cusps.push_back({tp.systole, tp.ok, n - d, d});
    rep.s = std::max(rep.s, d);
    all_one = all_one && d == 1;
    all_codim_small = all_codim_small && (d == n - 1 || d == n);
    any_full = any_full || d == n;
    if (d <= n - 2) flats.insert(n - d);
  }
  rep.cohomology = group_cohomology(spec);
  ClassificationFlags& f = rep.flags;
  f.is_manifold = all_one;
  f.is_pd_group = all_one;
  f.cat_minus_one = all_codim_small;
  f.isolated_flats = true;
  f.flat_dims_present.assign(flats.begin(), flats.end());
  f.simply_connected_at_infinity = !any_full;
  f.systolic_excluded = f.simply_connected_at_infinity;
  rep.notes.push_back("schedule is a model assumption");
  for (const std::string& w : rep.cohomology.warnings) rep.notes.push_back(w);
  return rep;
}

nlohmann::json to_json(const InvariantReport& report) {
  nlohmann::json cusps = nlohmann::json::array();
  for (const CuspInvariants& c : report.cusps)
    cusps.push_back(
        {{"systole", c.systole}, {"two_pi_ok", c.two_pi_ok}, {"core_dim", c.core_dim}, {"torus_dim", c.torus_dim}});
  const ClassificationFlags& f = report.flags;
  return {{"n", report.n},
          {"cusps", cusps},
          {"s", report.s},
          {"group_cohomology", to_json(report.cohomology.group)},
          {"boundary_cohomology", to_json(report.cohomology.boundary)},
          {"flags",
           {{"is_manifold", f.is_manifold},
            {"is_pd_group", f.is_pd_group},
            {"cat_minus_one", f.cat_minus_one},
            {"isolated_flats", f.isolated_flats},
            {"flat_dims_present", f.flat_dims_present},
            {"simply_connected_at_infinity", f.simply_connected_at_infinity},
            {"systolic_excluded", f.systolic_excluded}}},
          {"notes", report.notes}};
}

std::string render_text(const InvariantReport& report) {
  std::ostringstream out;
  out << "n = " << report.n << ", s = " << report.s << "\n\n";
  out << "cusp  systole     2pi  core_dim  torus_dim\n";
  for (std::size_t i = 0; i < report.cusps.size(); ++i) {
    const CuspInvariants& c = report.cusps[i];
    char line[96];
    std::snprintf(line, sizeof line, "%-5zu %-11.6f %-4s %-9d %d\n", i, c.systole, c.two_pi_ok ? "yes" : "no",
                  c.core_dim, c.torus_dim);
    out << line;
  }
  out << "\n q  H^q(G;ZG)  H^q(boundary)\n";
  for (int q = 0; q <= report.n + 1; ++q) {
    char line[64];
    std::snprintf(line, sizeof line, "%2d  %-10s %s\n", q, report.cohomology.group.at(q).str().c_str(),
                  report.cohomology.boundary.at(q).str().c_str());
    out << line;
  }
  const ClassificationFlags& f = report.flags;
  auto yn = [](bool b) { return b ? "yes" : "no"; };
  out << "\nmanifold: " << yn(f.is_manifold) << "\nPD group: " << yn(f.is_pd_group)
      << "\nCAT(-1): " << yn(f.cat_minus_one) << "\nisolated flats: " << yn(f.isolated_flats) << "\nflat dims:";
  if (f.flat_dims_present.empty()) out << " none";
  for (int d : f.flat_dims_present) out << ' ' << d;
  out << "\nsimply connected at infinity: " << yn(f.simply_connected_at_infinity)
      << "\nnot systolic: " << yn(f.systolic_excluded) << '\n';
  for (const std::string& note : report.notes) out << "note: " << note << '\n';
  return out.str();
}

}  // namespace warpfill
