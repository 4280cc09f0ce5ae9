#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "statedex/records.hpp"

namespace statedex {

/// Equipment-value cutoffs for buy classification. A side total below
/// `eco_below` is an eco, at or above `full_buy_from` a full buy, and
/// anything between a semi buy. Rounds listed in `pistol_rounds` are
/// always pistol rounds.
struct BuyThresholds {
  int eco_below = 5000;
  int full_buy_from = 20000;
  std::vector<int> pistol_rounds{1, 16};
};

BuyType classify_buy(int side_equipment_total, int round_number,
                     const BuyThresholds& thresholds = {});

struct IngestOptions {
  BuyThresholds buy;
  /// Minimum spacing between retained frames, in seconds.
  double frame_interval = 1.0;
};

/// A parsed match plus the rounds that had to be dropped.
struct ParseResult {
  MatchRecord match;
  std::vector<std::string> diagnostics;
  int rejected_rounds = 0;

  bool partial() const noexcept { return rejected_rounds > 0; }
};

/// Parses one replay document. Document-level schema violations throw
/// ParseError; a bad round is dropped with a diagnostic and the rest of
/// the match is kept. Frames closer than `frame_interval` to the last kept
/// frame are discarded.
ParseResult parse_match(const nlohmann::json& document, const IngestOptions& options = {});
ParseResult parse_match_file(const std::filesystem::path& path, const IngestOptions& options = {});

/// Renders a match in the replay file format. parse_match(render_match(m))
/// reproduces `m` exactly.
nlohmann::json render_match(const MatchRecord& match);

/// Checks every record invariant; returns one message per violation.
std::vector<std::string> validate_match(const MatchRecord& match);

}  // namespace statedex
