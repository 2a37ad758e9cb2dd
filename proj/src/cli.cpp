#include "warpfill/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <unistd.h>

#include "warpfill/campaigns.hpp"
#include "warpfill/curvature_lab.hpp"
#include "warpfill/error.hpp"
#include "warpfill/filling_topology.hpp"
#include "warpfill/warp_engine.hpp"
#include "warpfill/warp_functions.hpp"

namespace warpfill::cli {

namespace {

using nlohmann::json;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool is_input_error(ErrorCode code) {
  return code != ErrorCode::SolverFailure && code != ErrorCode::NoConvergence;
}

json read_json_file(const std::string& path, const std::string& flag) {
  if (path.empty()) throw InputError(flag + ": required");
  std::ifstream in(path);
  if (!in) throw InputError(flag + ": cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& ex) {
    throw InputError(path + ": " + ex.what());
  }
}

WPoint parse_point(const std::string& text, const WarpedSpace& space, const std::string& flag) {
  if (text.empty()) throw InputError(flag + ": required");
  json doc;
  if (text.front() == '{') {
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& ex) {
      throw InputError(flag + ": " + ex.what());
    }
  } else {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t used = 0;
        v.push_back(std::stod(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw InputError(flag + ": '" + item + "' is not a number");
      }
    }
    const int k = space.euclid_dim;
    const int d = space.torus_dim();
    if (static_cast<int>(v.size()) != 1 + k + d)
      throw InputError(flag + ": expected " + std::to_string(1 + k + d) + " comma-separated coordinates (r, e, theta)");
    doc = {{"r", v[0]},
           {"e", std::vector<double>(v.begin() + 1, v.begin() + 1 + k)},
           {"theta", std::vector<double>(v.begin() + 1 + k, v.end())}};
  }
  return point_from_json(doc, space, flag.substr(2));
}

WarpedSpace load_space(const RunConfig& c) {
  const json doc = read_json_file(c.space_path, "--space");
  try {
    return warped_space_from_json(doc);
  } catch (const json::exception& ex) {
    throw InputError(c.space_path + ": " + ex.what());
  }
}

json check(const std::string& name, bool passed, json detail = nullptr) {
  json j = {{"name", name}, {"passed", passed}};
  if (!detail.is_null()) j["detail"] = std::move(detail);
  return j;
}

struct Payload {
  json results;
  json checks = json::array();
  std::string csv;
  std::string text;
};

std::string csv_number(double x) {
  std::ostringstream out;
  out << std::setprecision(17) << x;
  return out.str();
}

// ---------------------------------------------------------------------------

Payload warp_build(const RunConfig& c) {
  WarpBuildOptions opts;
  opts.delta0_hint = c.delta0;
  opts.mollify = c.mollify;
  const WarpPair pair = build_fg(c.lambda, opts);
  Payload p;
  p.results = to_json(pair);

  const int n = c.grid > 0 ? c.grid : 10000;
  for (const CampaignCheck& ch : warp_pair_checks(pair, c.lambda, n)) p.checks.push_back(check(ch.name, ch.passed, ch.detail));
  p.csv = sample_table_csv(pair, c.grid > 0 ? c.grid : 1000);
  return p;
}

Payload geodesic(const RunConfig& c) {
  const WarpedSpace space = load_space(c);
  const WPoint a = parse_point(c.from, space, "--from");
  const WPoint b = parse_point(c.to, space, "--to");
  SolverOptions opts;
  opts.seed = c.seed;
  const GeodesicResult res = solve_geodesic(space, a, b, opts);
  Payload p;
  p.results = to_json(res);
  p.checks.push_back(check("converged", res.converged, {{"residual", res.residual}}));

  std::ostringstream csv;
  csv << "index,r";
  for (int i = 0; i < space.euclid_dim; ++i) csv << ",e" << i;
  for (int i = 0; i < space.torus_dim(); ++i) csv << ",theta" << i;
  csv << '\n';
  Eigen::VectorXd lift = Eigen::VectorXd::Zero(space.torus_dim());
  for (std::size_t i = 0; i < res.path.vertices.size(); ++i) {
    if (i > 0 && i - 1 < res.path.deck_shifts.size() && res.path.deck_shifts[i - 1].size() == lift.size())
      lift += res.path.deck_shifts[i - 1].cast<double>();
    const WPoint& v = res.path.vertices[i];
    csv << i << ',' << csv_number(v.r);
    for (Eigen::Index j = 0; j < v.e.size(); ++j) csv << ',' << csv_number(v.e[j]);
    for (Eigen::Index j = 0; j < v.theta.size(); ++j) csv << ',' << csv_number(v.theta[j] + lift[j]);
    csv << '\n';
  }
  p.csv = csv.str();
  return p;
}

Payload cat_test_cmd(const RunConfig& c) {
  const WarpedSpace space = load_space(c);
  const int count = c.samples > 0 ? c.samples : 20;
  const double tol = c.tolerance > 0.0 ? c.tolerance : 2e-4;
  const double mid = 0.5 * (space.r_min + space.r_max);
  std::vector<double> lo{std::max(space.r_min, mid - 1.0)}, hi{std::min(space.r_max, mid + 1.0)};
  for (int i = 0; i < space.euclid_dim; ++i) lo.push_back(-1.0), hi.push_back(1.0);
  for (int i = 0; i < space.torus_dim(); ++i) lo.push_back(0.0), hi.push_back(1.0);
  SolverOptions opts;
  opts.seed = c.seed;
  const std::vector<Triangle> tris = sample_triangles(space, lo, hi, count, c.seed, 0.1, c.max_side, opts);
  const ComparisonReport rep = cat_campaign(space, tris, c.kappa, c.param_samples, c.seed, tol, opts);
  Payload p;
  p.results = to_json(rep);
  p.checks.push_back(check("cat_kappa", rep.passed, {{"max_violation", rep.max_violation}, {"tolerance", tol}}));
  std::ostringstream csv;
  csv << "triangle,side_a,side_b,s_a,s_b,d_space,d_model,violation\n";
  for (const ComparisonSample& s : rep.samples)
    csv << s.triangle << ',' << s.side_a << ',' << s.side_b << ',' << csv_number(s.s_a) << ',' << csv_number(s.s_b)
        << ',' << csv_number(s.d_space) << ',' << csv_number(s.d_model) << ',' << csv_number(s.violation()) << '\n';
  p.csv = csv.str();
  return p;
}

Payload curvature_scan_cmd(const RunConfig& c) {
  const WarpedSpace space = c.space_path.empty()
                                ? filling_model_space(build_fg(c.lambda, {c.delta0, c.mollify, std::nullopt}),
                                                      c.euclid_dim, LatticeTorus::circle(7.0))
                                : load_space(c);
  const CurvatureScan scan = curvature_scan(space, c.grid > 0 ? c.grid : 400, c.seed);
  Payload p;
  p.results = to_json(scan);
  bool spots = std::all_of(scan.spot_checks.begin(), scan.spot_checks.end(), [](const SpotCheck& s) { return s.ok; });
  p.checks.push_back(check("fd_spot_checks", spots));
  if (space.euclid_dim <= 1)
    p.checks.push_back(check("kappa_positive", scan.kappa_empirical > 0.0, {{"kappa_empirical", scan.kappa_empirical}}));
  p.csv = to_csv(scan);
  return p;
}

Payload fk_check(const RunConfig& c) {
  const WarpedSpace space = load_space(c);
  const WPoint a = parse_point(c.from, space, "--from");
  const WPoint b = parse_point(c.to, space, "--to");
  SolverOptions opts;
  opts.seed = c.seed;
  const GeodesicResult geo = solve_geodesic(space, a, b, opts);
  const int n = c.samples > 0 ? c.samples : 201;
  if (n < 3) throw InputError("--samples: need at least 3 points along the geodesic");

  std::optional<WPoint> target;
  double margin = 1e-6;
  if (c.function == "cosh-distance") {
    target = parse_point(c.target, space, "--target");
    margin = 1e-4;
  } else if (c.function != "sinh-core") {
    throw InputError("--function: expected sinh-core or cosh-distance");
  }
  if (c.tolerance > 0.0) margin = c.tolerance;

  std::vector<std::pair<double, double>> samples(n);
  for (int i = 0; i < n; ++i) {
    const double t = geo.distance * i / (n - 1);
    const WPoint x = point_at_arclength(space, geo.path, t);
    const double u = target ? std::cosh(solve_geodesic(space, x, *target, opts).distance)
                            : std::sinh(distance_to_core(space, x));
    samples[i] = {t, u};
  }
  const FKReport rep = fk_convexity(samples, c.kappa, c.window, margin);
  Payload p;
  p.results = {{"function", c.function}, {"geodesic_length", geo.distance}, {"fk", to_json(rep)}};
  p.checks.push_back(check("geodesic_converged", geo.converged));
  p.checks.push_back(check("fk_convex", rep.passed, {{"max_deficit", rep.max_deficit}}));
  std::ostringstream csv;
  csv << "t,u\n";
  for (const auto& [t, u] : samples) csv << csv_number(t) << ',' << csv_number(u) << '\n';
  p.csv = csv.str();
  return p;
}

ShellSchedule load_schedule(const std::string& path, const FillingSpec& spec) {
  const json doc = read_json_file(path, "--schedule");
  const json& shells = doc.is_object() && doc.contains("shells") ? doc["shells"] : doc;
  if (!shells.is_array()) throw InputError("shells: expected an array of cusp-index lists");
  ShellSchedule out;
  for (std::size_t i = 0; i < shells.size(); ++i) {
    const std::string field = "shells[" + std::to_string(i) + "]";
    if (!shells[i].is_array()) throw InputError(field + ": expected an array of cusp indices");
    std::vector<int> shell;
    for (const json& x : shells[i]) {
      if (!x.is_number_integer() || x.get<int>() < 0 || x.get<int>() >= static_cast<int>(spec.cusps.size()))
        throw InputError(field + ": invalid cusp index " + x.dump());
      shell.push_back(x.get<int>());
    }
    out.push_back(shell);
  }
  return out;
}

Payload filling_analyze(const RunConfig& c) {
  const FillingSpec spec = filling_from_json(read_json_file(c.spec_path, "--spec"));
  const ShellSchedule schedule = c.schedule_path.empty() ? round_robin_schedule(spec) : load_schedule(c.schedule_path, spec);
  const InvariantReport rep = classify(spec);
  const ShellSequence seq = shell_sequence(spec, schedule, c.repetitions);

  Payload p;
  p.results = to_json(rep);
  json shells = json::array();
  for (const CohomologyProfile& s : seq.shells) shells.push_back(to_json(s));
  p.results["schedule"] = schedule;
  p.results["shells"] = shells;
  p.results["colimit"] = to_json(seq.colimit);
  for (std::size_t i = 0; i < rep.cusps.size(); ++i)
    p.checks.push_back(check("cusps[" + std::to_string(i) + "].two_pi_ok", rep.cusps[i].two_pi_ok,
                             {{"systole", rep.cusps[i].systole}}));
  p.checks.push_back(check("colimit_matches_boundary", seq.colimit == rep.cohomology.boundary));

  std::ostringstream csv;
  csv << "q,group,boundary,colimit\n";
  for (int q = 0; q <= spec.n + 1; ++q)
    csv << q << ',' << rep.cohomology.group.at(q).str() << ',' << rep.cohomology.boundary.at(q).str() << ','
        << seq.colimit.at(q).str() << '\n';
  p.csv = csv.str();
  p.text = render_text(rep);
  return p;
}

Payload campaign(const RunConfig& c) {
  Payload p;
  std::vector<int> ids;
  if (c.campaign == "all") {
    for (int i = 1; i <= kCampaignCount; ++i) ids.push_back(i);
  } else {
    const std::string& id = c.campaign;
    if (id.size() != 3 || id.compare(0, 2, "ac") != 0 || id[2] < '1' || id[2] > '0' + kCampaignCount)
      throw InputError("--id: expected ac1..ac" + std::to_string(kCampaignCount) + " or all");
    ids.push_back(id[2] - '0');
  }
  p.results = json::array();
  for (int id : ids) {
    const CampaignResult r = run_campaign(id, c.seed);
    p.results.push_back(to_json(r));
    const std::string prefix = "ac" + std::to_string(id) + ".";
    for (const CampaignCheck& ch : r.checks) p.checks.push_back(check(prefix + ch.name, ch.passed, ch.detail));
    std::istringstream lines(r.csv);
    std::string line;
    bool header = true;
    while (std::getline(lines, line)) {
      p.csv += (header ? std::string("campaign,") : "ac" + std::to_string(id) + ",") + line + "\n";
      header = false;
    }
  }
  return p;
}

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("--out: cannot write '" + path + "'");
    out << content;
    out.flush();
    if (!out) throw InputError("--out: write failed for '" + path + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw InputError("--out: cannot rename into '" + path + "': " + ec.message());
  }
}

}  // namespace

std::string command_name(Command c) {
  switch (c) {
    case Command::WarpBuild: return "warp-build";
    case Command::Geodesic: return "geodesic";
    case Command::CatTest: return "cat-test";
    case Command::CurvatureScan: return "curvature-scan";
    case Command::FkCheck: return "fk-check";
    case Command::FillingAnalyze: return "filling-analyze";
    case Command::Campaign: return "campaign";
  }
  return "?";
}

nlohmann::json to_json(const RunConfig& c) {
  json j = {{"command", command_name(c.command)}, {"seed", c.seed}, {"format", c.format}};
  switch (c.command) {
    case Command::WarpBuild:
      j["lambda"] = c.lambda;
      j["delta0"] = c.delta0 ? json(*c.delta0) : json(nullptr);
      j["mollify"] = c.mollify;
      j["grid"] = c.grid;
      break;
    case Command::Geodesic:
      j["space"] = c.space_path;
      j["from"] = c.from;
      j["to"] = c.to;
      break;
    case Command::CatTest:
      j["space"] = c.space_path;
      j["kappa"] = c.kappa;
      j["samples"] = c.samples;
      j["param_samples"] = c.param_samples;
      j["tolerance"] = c.tolerance;
      j["max_side"] = c.max_side;
      break;
    case Command::CurvatureScan:
      j["space"] = c.space_path;
      j["lambda"] = c.lambda;
      j["delta0"] = c.delta0 ? json(*c.delta0) : json(nullptr);
      j["mollify"] = c.mollify;
      j["euclid_dim"] = c.euclid_dim;
      j["grid"] = c.grid;
      break;
    case Command::FkCheck:
      j["space"] = c.space_path;
      j["from"] = c.from;
      j["to"] = c.to;
      j["function"] = c.function;
      j["target"] = c.target;
      j["kappa"] = c.kappa;
      j["samples"] = c.samples;
      j["window"] = c.window;
      j["tolerance"] = c.tolerance;
      break;
    case Command::FillingAnalyze:
      j["spec"] = c.spec_path;
      j["schedule"] = c.schedule_path;
      j["repetitions"] = c.repetitions;
      break;
    case Command::Campaign:
      j["id"] = c.campaign;
      break;
  }
  return j;
}

RunOutcome run(const RunConfig& config) {
  RunOutcome out;
  try {
    if (config.format != "json" && config.format != "csv" && config.format != "text")
      throw InputError("--format: expected json or csv");
    if (config.format == "text" && config.command != Command::FillingAnalyze)
      throw InputError("--format: text is only available for filling-analyze");
    if (config.tolerance < 0.0) throw InputError("--tolerance: must be positive");
    if (config.window <= 0.0) throw InputError("--window: must be positive");

    Payload p;
    switch (config.command) {
      case Command::WarpBuild: p = warp_build(config); break;
      case Command::Geodesic: p = geodesic(config); break;
      case Command::CatTest: p = cat_test_cmd(config); break;
      case Command::CurvatureScan: p = curvature_scan_cmd(config); break;
      case Command::FkCheck: p = fk_check(config); break;
      case Command::FillingAnalyze: p = filling_analyze(config); break;
      case Command::Campaign: p = campaign(config); break;
    }
    const bool passed =
        std::all_of(p.checks.begin(), p.checks.end(), [](const json& ch) { return ch["passed"].get<bool>(); });
    if (config.format == "csv") {
      out.report = p.csv;
    } else if (config.format == "text") {
      out.report = p.text;
    } else {
      json doc = {{"tool", kToolName},
                  {"version", kVersion},
                  {"config", to_json(config)},
                  {"results", p.results},
                  {"summary", {{"passed", passed}, {"checks", p.checks}}}};
      out.report = doc.dump(2) + "\n";
    }
    out.exit_code = passed ? 0 : 1;
    if (!passed) {
      for (const json& ch : p.checks)
        if (!ch["passed"].get<bool>()) out.diagnostic += "check failed: " + ch["name"].get<std::string>() + "\n";
    }
    if (!config.out_path.empty()) write_atomic(config.out_path, out.report);
  } catch (const InputError& ex) {
    out = {2, "", std::string("input error: ") + ex.what() + "\n"};
  } catch (const Error& ex) {
    out = {is_input_error(ex.code()) ? 2 : 1, "", std::string(ex.what()) + "\n"};
  } catch (const nlohmann::json::exception& ex) {
    out = {2, "", std::string("input error: ") + ex.what() + "\n"};
  }
  return out;
}

int main(int argc, char** argv) {
  CLI::App app{"Warped-product filling geometry toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  RunConfig c;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", c.seed, "Random seed")->capture_default_str();
    sub->add_option("--out", c.out_path, "Report path (default: stdout)");
    sub->add_option("--format", c.format, "json or csv")->capture_default_str();
  };
  auto warp_opts = [&](CLI::App* sub) {
    sub->add_option("--lambda", c.lambda, "Collar length")->capture_default_str();
    sub->add_option("--delta0", c.delta0, "Knot hint (default 0.2)");
    sub->add_flag("--mollify", c.mollify, "Use C-infinity splices at the knots");
  };

  CLI::App* wb = app.add_subcommand("warp-build", "Build the warping pair f, g");
  warp_opts(wb);
  wb->add_option("--grid", c.grid, "Check grid / table rows");
  common(wb);

  CLI::App* geo = app.add_subcommand("geodesic", "Solve a geodesic between two points");
  geo->add_option("--space", c.space_path, "Space JSON")->required();
  geo->add_option("--from", c.from, "Start point")->required();
  geo->add_option("--to", c.to, "End point")->required();
  common(geo);

  CLI::App* cat = app.add_subcommand("cat-test", "CAT(kappa) comparison campaign on random triangles");
  cat->add_option("--space", c.space_path, "Space JSON")->required();
  cat->add_option("--kappa", c.kappa, "Model curvature (<= 0)")->capture_default_str();
  cat->add_option("--samples", c.samples, "Number of triangles (default 20)");
  cat->add_option("--param-samples", c.param_samples, "Point pairs per triangle")->capture_default_str();
  cat->add_option("--tolerance", c.tolerance, "Violation tolerance (default 2e-4)");
  cat->add_option("--max-side", c.max_side, "Longest allowed side")->capture_default_str();
  common(cat);

  CLI::App* cs = app.add_subcommand("curvature-scan", "Tabulate curvature terms and finite-difference checks");
  cs->add_option("--space", c.space_path, "Space JSON (default: build from --lambda)");
  warp_opts(cs);
  cs->add_option("--euclid-dim", c.euclid_dim, "Euclidean factor dimension for the built space")->capture_default_str();
  cs->add_option("--grid", c.grid, "Grid intervals (default 400)");
  common(cs);

  CLI::App* fk = app.add_subcommand("fk-check", "Barrier convexity of a function along a geodesic");
  fk->add_option("--space", c.space_path, "Space JSON")->required();
  fk->add_option("--from", c.from, "Geodesic start")->required();
  fk->add_option("--to", c.to, "Geodesic end")->required();
  fk->add_option("--function", c.function, "sinh-core or cosh-distance")->capture_default_str();
  fk->add_option("--target", c.target, "Reference point for cosh-distance");
  fk->add_option("--kappa", c.kappa, "K")->capture_default_str();
  fk->add_option("--samples", c.samples, "Points along the geodesic (default 201)");
  fk->add_option("--window", c.window, "Barrier window")->capture_default_str();
  fk->add_option("--tolerance", c.tolerance, "Violation margin");
  common(fk);

  CLI::App* fa = app.add_subcommand("filling-analyze", "Cohomology table and classification of a filling");
  fa->add_option("--spec", c.spec_path, "Filling spec JSON")->required();
  fa->add_option("--schedule", c.schedule_path, "Shell schedule JSON (default: round robin)");
  fa->add_option("--repetitions", c.repetitions, "Schedule repetitions")->capture_default_str();
  fa->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  fa->add_option("--out", c.out_path, "Report path (default: stdout)");
  fa->add_option("--format", c.format, "json, csv or text")->capture_default_str();

  CLI::App* camp = app.add_subcommand("campaign", "Run acceptance campaigns ac1..ac8");
  camp->add_option("--id", c.campaign, "ac1..ac8 or all")->capture_default_str();
  common(camp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex);
    return code == 0 ? 0 : 2;
  }
  const std::pair<CLI::App*, Command> table[] = {{wb, Command::WarpBuild},     {geo, Command::Geodesic},
                                                 {cat, Command::CatTest},      {cs, Command::CurvatureScan},
                                                 {fk, Command::FkCheck},       {fa, Command::FillingAnalyze},
                                                 {camp, Command::Campaign}};
  for (const auto& [sub, cmd] : table)
    if (sub->parsed()) c.command = cmd;

  const RunOutcome res = run(c);
  if (c.out_path.empty()) std::cout << res.report;
  std::cerr << res.diagnostic;
  return res.exit_code;
}

}  // namespace warpfill::cli
