#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "statedex/navmesh.hpp"
#include "statedex/records.hpp"
#include "statedex/store.hpp"
#include "statedex/query.hpp"
#include "statedex/synth.hpp"

namespace fixtures {

std::filesystem::path source_dir();
std::filesystem::path mesh_dir();
statedex::MeshCatalog meshes();

/// Centre of the first area of `place`, at the area's z.
statedex::Vec3 place_point(const statedex::NavMesh& mesh, const std::string& place, double jitter = 0.0);

statedex::PlayerSnapshot player(const std::string& id, statedex::Side side, statedex::Vec3 pos, int hp = 100,
                                int equipment = 4000, int grenades = 2);

/// 57 bomb-site retake rounds on de_inferno_s: 51 won by T and 6 won by CT.
/// Every round has a post-plant frame with 2 T in BombsiteB and 3 CT in
/// CTSpawn, surrounded by other frames. A fourth match replays four of
/// those rounds as CT eliminations, which the retake filter excludes.
std::vector<statedex::MatchRecord> retake_corpus(const statedex::MeshCatalog& meshes);

/// One match with two 90-frame rounds and known event counts
/// (round 1: 3 kills, 4 grenades, 5 damages, 1 plant; round 2: 2, 1, 0, 0).
statedex::MatchRecord ninety_frame_match(const statedex::MeshCatalog& meshes);

/// Up to five players per side at random positions around the map extent
/// (some outside it), a random subset dead.
statedex::GameState random_state(const statedex::NavMesh& mesh, std::mt19937_64& rng);

/// Random token with `places` counts per side, each in [0, 5].
statedex::Token random_token(std::size_t places, std::mt19937_64& rng);

/// Random filter over the store's teams, buys, end reasons and dates; each
/// field is set with probability `density`.
statedex::FilterSpec random_filter(const statedex::StateStore& store, std::mt19937_64& rng, double density);

/// Sketch copied from a random stored state (alive players, positions
/// jittered within `jitter` units). Partial mode keeps a random non-empty
/// subset of the players.
statedex::QuerySpec random_query(const statedex::StateStore& store, std::mt19937_64& rng, statedex::QueryMode mode,
                                 double jitter, double filter_density);

/// Small synthetic corpus, cached per (matches, rounds, seed).
std::vector<statedex::MatchRecord> synth(int matches, int rounds, std::uint64_t seed);

}  // namespace fixtures
