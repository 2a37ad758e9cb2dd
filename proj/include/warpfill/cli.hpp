#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace warpfill::cli {

inline constexpr const char* kToolName = "warpfill";
inline constexpr const char* kVersion = "0.1.0";

enum class Command { WarpBuild, Geodesic, CatTest, CurvatureScan, FkCheck, FillingAnalyze, Campaign };

std::string command_name(Command c);

struct RunConfig {
  Command command = Command::WarpBuild;

  // warp-build, and curvature-scan when no space file is given
  double lambda = 1.6;
  std::optional<double> delta0;
  bool mollify = false;
  int euclid_dim = 1;

  std::string space_path;
  std::string from;  // point as JSON object or "r,e...,theta..."
  std::string to;
  std::string target;  // fk-check reference point
  std::string function = "sinh-core";

  double kappa = 0.0;
  int samples = 0;  // 0: command default
  int param_samples = 8;
  double tolerance = 0.0;  // 0: command default
  double window = 0.1;
  double max_side = 3.0;
  std::uint64_t seed = 42;
  int grid = 0;

  std::string spec_path;
  std::string schedule_path;
  int repetitions = 3;

  std::string campaign = "all";  // ac1..ac8 or all

  std::string out_path;  // empty: stdout
  std::string format = "json";
};

nlohmann::json to_json(const RunConfig& config);

struct RunOutcome {
  int exit_code = 0;
  std::string report;  // document as written
  std::string diagnostic;
};

/// Executes the command and writes the report to config.out_path (atomically)
/// or returns it for stdout. Exit 0 on pass, 1 on a failed check, 2 on bad
/// input.
RunOutcome run(const RunConfig& config);

/// Parses argv and runs; prints diagnostics to stderr.
int main(int argc, char** argv);

}  // namespace warpfill::cli
