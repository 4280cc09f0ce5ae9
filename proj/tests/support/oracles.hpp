// Brute-force reference implementations used to check the engine. They
// read raw documents and scan everything; nothing here is fast.
#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "statedex/query.hpp"
#include "statedex/store.hpp"

namespace oracle {

struct Area {
  long long id;
  double x0, y0, x1, y1, z;
  std::string place;
};

struct Mesh {
  std::string map;
  std::vector<std::string> sorted_places;
  std::vector<Area> areas;
};

Mesh mesh_from_json(const nlohmann::json& doc);
Mesh load_mesh(const std::filesystem::path& path);

std::string locate_place(const Mesh& mesh, const statedex::Vec3& p);

/// Per-side counts in sorted-place order: [0] = T, [1] = CT.
using Tally = std::array<std::vector<int>, 2>;
Tally tally(const Mesh& mesh, const statedex::GameState& state);
std::string render(const Tally& t);
int l1(const Tally& a, const Tally& b);

/// Sum over alive players of `from` of the nearest alive same-side player
/// in `to`; negative if some player has no counterpart.
double min_sum(const statedex::GameState& from, const statedex::GameState& to);

bool filter(const statedex::StateStore& store, const statedex::FilterSpec& f, statedex::StateIndex i);

/// Tallies of every stored state, computed from the materialized states.
std::vector<Tally> tally_corpus(const Mesh& mesh, const statedex::StateStore& store,
                                std::uint32_t map_index);

std::vector<statedex::StateIndex> exact(const statedex::StateStore& store, const std::vector<Tally>& tallies,
                                        std::uint32_t map_index, const Tally& target,
                                        const statedex::FilterSpec& f);
std::vector<statedex::StateIndex> partial(const statedex::StateStore& store, const std::vector<Tally>& tallies,
                                          std::uint32_t map_index, const Tally& sketched,
                                          const statedex::FilterSpec& f);
/// Sorted hamming distances of the k closest filtered states.
std::vector<int> nearest_distances(const statedex::StateStore& store, const std::vector<Tally>& tallies,
                                   std::uint32_t map_index, const Tally& target,
                                   const statedex::FilterSpec& f, std::size_t k);

/// Pairwise-comparison AUC.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

}  // namespace oracle
