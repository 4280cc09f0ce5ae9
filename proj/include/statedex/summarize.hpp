#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "statedex/store.hpp"

namespace statedex {

/// Positional density of one side over a result set. Cells are row-major
/// with row 0 at y_min and column 0 at x_min.
struct HeatmapGrid {
  std::string map;
  Side side = Side::T;
  std::uint32_t nx = 0;
  std::uint32_t ny = 0;
  Rect bounds;
  /// Raw per-cell position counts before smoothing.
  std::vector<std::uint64_t> counts;
  /// Smoothed and rescaled to a maximum of 1.0; all zero if no positions.
  std::vector<double> density;

  std::uint64_t total_positions() const;
  nlohmann::json to_json() const;
};

/// Cell index of a point, clamped into the grid.
std::pair<std::uint32_t, std::uint32_t> heatmap_cell(const Rect& bounds, std::uint32_t nx,
                                                     std::uint32_t ny, double x, double y);

/// Bins every alive `side` player position over `refs`, applies one pass of
/// the 3x3 binomial kernel [1 2 1; 2 4 2; 1 2 1] / 16 (zero outside the
/// grid), and rescales the maximum to 1. Points outside the map extent are
/// clamped into the border cells.
HeatmapGrid heatmap(const StateStore& store, std::string_view map, std::span<const StateIndex> refs,
                    Side side, std::uint32_t nx, std::uint32_t ny);

/// Smoothing and rescaling step on its own, for callers that bin
/// themselves.
std::vector<double> smooth_and_normalize(const std::vector<std::uint64_t>& counts,
                                         std::uint32_t nx, std::uint32_t ny);

struct OutcomeTable {
  int t_wins = 0;
  int ct_wins = 0;
  std::map<EndReason, int> by_end_reason;
  /// ct_wins / (t_wins + ct_wins); absent when no rounds were counted.
  std::optional<double> ct_win_rate;

  int rounds() const { return t_wins + ct_wins; }
  nlohmann::json to_json() const;
};

/// Tallies winners and end reasons over the distinct rounds of `refs`.
OutcomeTable outcome_table(const StateStore& store, std::span<const StateIndex> refs);

}  // namespace statedex
