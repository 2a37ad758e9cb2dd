#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace warpfill {

struct CampaignCheck {
  std::string name;
  bool passed = false;
  nlohmann::json detail;
};

struct CampaignResult {
  int id = 0;
  std::string title;
  nlohmann::json results;
  std::vector<CampaignCheck> checks;
  std::string csv;

  bool passed() const;
};

struct WarpPair;

/// Knot mismatch, exact boundary pieces and grid convexity of a built pair.
std::vector<CampaignCheck> warp_pair_checks(const WarpPair& pair, double lambda, int grid);

inline constexpr int kCampaignCount = 8;

/// Runs acceptance campaign id (1..8) with the given seed. Deterministic for a
/// fixed seed. Throws INVALID_INPUT for an unknown id.
CampaignResult run_campaign(int id, std::uint64_t seed = 42);

nlohmann::json to_json(const CampaignResult& result);

}  // namespace warpfill
