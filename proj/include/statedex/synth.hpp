#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "statedex/ingest.hpp"
#include "statedex/navmesh.hpp"
#include "statedex/records.hpp"

namespace statedex {

struct SynthConfig {
  int matches = 10;
  int rounds_per_match = 25;
  std::vector<std::string> teams{"Astra", "Borealis", "Cinder", "Drift", "Ember", "Fjord"};
  /// Map names; match i is played on maps[i % maps.size()].
  std::vector<std::string> maps{"de_inferno_s", "de_dust_s"};
  std::vector<std::string> competitions{"Synthetic Open", "Synthetic League"};
  std::string start_date = "2020-04-01";
  BuyThresholds buy;

  /// Missing keys keep their defaults. Throws ParseError on bad values.
  static SynthConfig from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;
};

/// Deterministic corpus generator. Positions are drawn per place from a
/// mixture over the place's areas, players drift along place adjacency
/// toward side-specific goals, and fights are resolved by a logistic
/// model of alive-count and equipment advantage, so round outcomes carry
/// a learnable signal.
class SynthGenerator {
 public:
  /// Throws UnknownMapError if a configured map is not in `meshes`.
  SynthGenerator(SynthConfig config, std::uint64_t seed, const MeshCatalog& meshes);

  /// Match `index` of the corpus; independent of generation order.
  MatchRecord generate(int index) const;

  const SynthConfig& config() const noexcept { return config_; }

 private:
  SynthConfig config_;
  std::uint64_t seed_;
  const MeshCatalog& meshes_;
};

std::vector<MatchRecord> synth_generate(const SynthConfig& config, std::uint64_t seed,
                                        const MeshCatalog& meshes);

}  // namespace statedex
