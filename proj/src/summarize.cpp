#include "statedex/summarize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "statedex/error.hpp"

namespace statedex {

using nlohmann::json;

std::uint64_t HeatmapGrid::total_positions() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

json HeatmapGrid::to_json() const {
  return {{"map", map},
          {"side", to_string(side)},
          {"nx", nx},
          {"ny", ny},
          {"bounds",
           {{"x_min", bounds.x_min},
            {"y_min", bounds.y_min},
            {"x_max", bounds.x_max},
            {"y_max", bounds.y_max}}},
          {"layout", "row-major, row 0 at y_min"},
          {"total_positions", total_positions()},
          {"counts", counts},
          {"density", density}};
}

std::pair<std::uint32_t, std::uint32_t> heatmap_cell(const Rect& b, std::uint32_t nx,
                                                     std::uint32_t ny, double x, double y) {
  auto axis = [](double v, double lo, double hi, std::uint32_t n) {
    const double f = (v - lo) / (hi - lo) * n;
    if (!(f > 0.0)) return std::uint32_t{0};  // also catches NaN
    return std::min(static_cast<std::uint32_t>(f), n - 1);
  };
  return {axis(x, b.x_min, b.x_max, nx), axis(y, b.y_min, b.y_max, ny)};
}

std::vector<double> smooth_and_normalize(const std::vector<std::uint64_t>& counts,
                                         std::uint32_t nx, std::uint32_t ny) {
  static constexpr int kKernel[3][3] = {{1, 2, 1}, {2, 4, 2}, {1, 2, 1}};
  std::vector<double> out(counts.size(), 0.0);
  double peak = 0.0;
  for (std::uint32_t iy = 0; iy < ny; ++iy) {
    for (std::uint32_t ix = 0; ix < nx; ++ix) {
      double acc = 0.0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const long sx = long(ix) + dx, sy = long(iy) + dy;
          if (sx < 0 || sy < 0 || sx >= long(nx) || sy >= long(ny)) continue;
          acc += kKernel[dy + 1][dx + 1] * double(counts[std::size_t(sy) * nx + std::size_t(sx)]);
        }
      }
      acc /= 16.0;
      out[std::size_t(iy) * nx + ix] = acc;
      peak = std::max(peak, acc);
    }
  }
  if (peak > 0.0)
    for (auto& v : out) v /= peak;
  return out;
}

HeatmapGrid heatmap(const StateStore& store, std::string_view map,
                    std::span<const StateIndex> refs, Side side, std::uint32_t nx,
                    std::uint32_t ny) {
  if (nx < 1 || ny < 1) throw Error("invalid_resolution", "heatmap resolution must be at least 1x1");
  const NavMesh& mesh = store.mesh(map);
  HeatmapGrid grid;
  grid.map = mesh.map_name();
  grid.side = side;
  grid.nx = nx;
  grid.ny = ny;
  grid.bounds = mesh.extent();
  grid.counts.assign(std::size_t(nx) * ny, 0);
  for (StateIndex i : refs) {
    if (i >= store.state_count()) throw Error("bad_ref", "state reference out of range");
    for (const auto& p : store.players(i)) {
      if (!p.alive() || p.side != side) continue;
      auto [cx, cy] = heatmap_cell(grid.bounds, nx, ny, p.position.x, p.position.y);
      ++grid.counts[std::size_t(cy) * nx + cx];
    }
  }
  grid.density = smooth_and_normalize(grid.counts, nx, ny);
  return grid;
}

json OutcomeTable::to_json() const {
  json reasons = json::object();
  for (const auto& [reason, n] : by_end_reason) reasons[std::string(to_string(reason))] = n;
  return {{"t_wins", t_wins},
          {"ct_wins", ct_wins},
          {"rounds", rounds()},
          {"by_end_reason", reasons},
          {"ct_win_rate", ct_win_rate ? json(*ct_win_rate) : json(nullptr)}};
}

OutcomeTable outcome_table(const StateStore& store, std::span<const StateIndex> refs) {
  std::vector<std::uint32_t> rounds;
  rounds.reserve(refs.size());
  for (StateIndex i : refs) {
    if (i >= store.state_count()) throw Error("bad_ref", "state reference out of range");
    rounds.push_back(store.row(i).round);
  }
  std::sort(rounds.begin(), rounds.end());
  rounds.erase(std::unique(rounds.begin(), rounds.end()), rounds.end());

  OutcomeTable table;
  for (auto r : rounds) {
    const auto& meta = store.data().rounds[r];
    (meta.winner == Side::CT ? table.ct_wins : table.t_wins) += 1;
    ++table.by_end_reason[meta.end_reason];
  }
  if (table.rounds() > 0)
    table.ct_win_rate = static_cast<double>(table.ct_wins) / static_cast<double>(table.rounds());
  return table;
}

}  // namespace statedex
