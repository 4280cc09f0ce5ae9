#include <doctest.h>

#include <fstream>
#include <set>

#include "fixtures.hpp"
#include "statedex/error.hpp"
#include "statedex/ingest.hpp"
#include "statedex/synth.hpp"

using namespace statedex;
using nlohmann::json;

TEST_CASE("same seed, same corpus") {
  const auto catalog = fixtures::meshes();
  SynthConfig config;
  config.matches = 3;
  config.rounds_per_match = 4;
  const auto a = synth_generate(config, 42, catalog);
  const auto b = synth_generate(config, 42, catalog);
  REQUIRE(a.size() == 3);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(render_match(a[i]).dump() == render_match(b[i]).dump());
  const auto c = synth_generate(config, 43, catalog);
  CHECK(render_match(a[0]).dump() != render_match(c[0]).dump());

  const SynthGenerator gen(config, 42, catalog);
  CHECK(gen.generate(2) == a[2]);  // independent of generation order
  CHECK(a[0].match_id == "m000000");
  CHECK(a[0].map == "de_inferno_s");
  CHECK(a[1].map == "de_dust_s");
}

TEST_CASE("generated rounds respect the record invariants") {
  const auto corpus = fixtures::synth(6, 25, 7);
  std::set<EndReason> reasons;
  int ct_wins = 0, rounds = 0;
  std::size_t states = 0;
  for (const auto& m : corpus) {
    CHECK(validate_match(m).empty());
    REQUIRE(m.rounds.size() == 25);
    for (const auto& r : m.rounds) {
      CHECK(winner_of(r.end_reason) == r.winner);
      reasons.insert(r.end_reason);
      ct_wins += r.winner == Side::CT;
      ++rounds;
      states += r.frames.size();
      for (const auto& f : r.frames) {
        int per_side[2] = {0, 0};
        for (const auto& p : f.players) {
          ++per_side[int(p.side)];
          CHECK(p.alive == (p.hp > 0));
          CHECK(p.hp <= 100);
        }
        CHECK(per_side[0] <= 5);
        CHECK(per_side[1] <= 5);
      }
    }
  }
  CHECK(reasons.size() == 5);
  CHECK(ct_wins > rounds / 4);
  CHECK(ct_wins < rounds * 3 / 4);
  // 1,000 matches of 25 rounds must reach 2M states: at least 80 per round.
  CHECK(double(states) / rounds >= 80.0);
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(SynthConfig::from_json(json{{"matches", -1}}), ParseError);
  CHECK_THROWS_AS(SynthConfig::from_json(json{{"rounds_per_match", 31}}), ParseError);
  CHECK_THROWS_AS(SynthConfig::from_json(json{{"teams", {"Solo"}}}), ParseError);
  CHECK_THROWS_AS(SynthConfig::from_json(json{{"maps", json::array()}}), ParseError);
  CHECK_THROWS_AS(SynthConfig::from_json(json{{"start_date", "yesterday"}}), ParseError);
  CHECK_THROWS_AS(SynthConfig::from_json(json{{"matchez", 3}}), ParseError);
  CHECK_THROWS_AS(SynthConfig::from_json(json{{"matches", "three"}}), ParseError);

  const auto c = SynthConfig::from_json(json{{"matches", 3}, {"maps", {"de_dust_s"}}});
  CHECK(c.matches == 3);
  CHECK(c.rounds_per_match == SynthConfig{}.rounds_per_match);
  CHECK(SynthConfig::from_json(c.to_json()).to_json() == c.to_json());

  SynthConfig bad;
  bad.maps = {"de_nowhere"};
  CHECK_THROWS_AS(SynthGenerator(bad, 1, fixtures::meshes()), UnknownMapError);
}

TEST_CASE("shipped config parses") {
  std::ifstream in(fixtures::source_dir() / "data" / "config" / "synth_small.json");
  REQUIRE(in);
  CHECK_NOTHROW(SynthConfig::from_json(json::parse(in)));
}
