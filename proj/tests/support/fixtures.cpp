#include "fixtures.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <tuple>

namespace fixtures {

using namespace statedex;

std::filesystem::path source_dir() { return STATEDEX_SOURCE_DIR; }
std::filesystem::path mesh_dir() { return source_dir() / "data" / "meshes"; }

MeshCatalog meshes() {
  static const MeshCatalog cached = load_mesh_dir(mesh_dir());
  return cached;
}

Vec3 place_point(const NavMesh& mesh, const std::string& place, double jitter) {
  const PlaceId id = mesh.find_place(place);
  for (const auto& a : mesh.areas()) {
    if (a.place_id != id) continue;
    const double cx = (a.bounds.x_min + a.bounds.x_max) / 2, cy = (a.bounds.y_min + a.bounds.y_max) / 2;
    return {cx + jitter, cy - jitter, a.z_center};
  }
  throw std::runtime_error("no area for place " + place);
}

PlayerSnapshot player(const std::string& id, Side side, Vec3 pos, int hp, int equipment, int grenades) {
  PlayerSnapshot p;
  p.player_id = id;
  p.side = side;
  p.position = pos;
  p.hp = hp;
  p.armor = hp > 0 ? 100 : 0;
  p.equipment_value = hp > 0 ? equipment : 0;
  p.grenade_count = hp > 0 ? grenades : 0;
  p.alive = hp > 0;
  return p;
}

namespace {

GameState frame(const std::string& map, const RoundRef& ref, double t, bool planted,
                std::vector<PlayerSnapshot> players) {
  GameState s;
  s.map = map;
  s.round_ref = ref;
  s.t = t;
  s.bomb_planted = planted;
  s.players = std::move(players);
  return s;
}

}  // namespace

std::vector<MatchRecord> retake_corpus(const MeshCatalog& catalog) {
  const NavMesh& mesh = catalog.at("de_inferno_s");
  const std::vector<std::string> teams{"Astra", "Borealis"};
  std::vector<MatchRecord> out;
  int round_index = 0;
  for (int m = 0; m < 3; ++m) {
    MatchRecord match;
    match.match_id = "retake" + std::to_string(m);
    match.date = "2021-0" + std::to_string(m + 1) + "-10";
    match.competition_name = "Retake Cup";
    match.team_ct_start = teams[0];
    match.team_t_start = teams[1];
    match.map = mesh.map_name();
    int score_ct = 0, score_t = 0;
    for (int r = 1; r <= 19; ++r, ++round_index) {
      RoundRecord round;
      round.match_id = match.match_id;
      round.round_number = r;
      std::tie(round.ct_team, round.t_team) = default_round_teams(match, r);
      // Rounds 3, 12, 22, 31, 41, 50 (corpus-wide) go to CT.
      const bool ct_win = round_index % 10 == 3 && round_index < 60;
      round.winner = ct_win ? Side::CT : Side::T;
      round.end_reason = ct_win ? EndReason::bomb_defused
                                : (round_index % 2 ? EndReason::bomb_exploded : EndReason::elimination_ct);
      round.ct_buy = BuyType::full_buy;
      round.t_buy = BuyType::full_buy;
      round.score_ct = score_ct;
      round.score_t = score_t;
      (ct_win ? score_ct : score_t) += 1;
      round.bomb_plant_t = 40.0;
      const RoundRef ref{match.match_id, r};
      auto id = [&](Side s, int k) { return (s == Side::CT ? round.ct_team : round.t_team) + "#" + std::to_string(k); };
      std::vector<PlayerSnapshot> early, retake;
      for (int k = 0; k < 5; ++k) {
        early.push_back(player(id(Side::T, k), Side::T, place_point(mesh, "TSpawn", k * 3.0)));
        early.push_back(player(id(Side::CT, k), Side::CT, place_point(mesh, "CTSpawn", k * 3.0)));
      }
      for (int k = 0; k < 5; ++k) {
        const bool t_alive = k < 2, ct_alive = k < 3;
        retake.push_back(player(id(Side::T, k), Side::T, place_point(mesh, "BombsiteB", k * 5.0 + r),
                                t_alive ? 60 : 0));
        retake.push_back(player(id(Side::CT, k), Side::CT, place_point(mesh, "CTSpawn", k * 5.0 + r),
                                ct_alive ? 80 : 0));
      }
      round.frames.push_back(frame(match.map, ref, 0.0, false, early));
      round.frames.push_back(frame(match.map, ref, 1.0, false, early));
      round.frames.push_back(frame(match.map, ref, 45.0, true, retake));
      round.frames.push_back(frame(match.map, ref, 46.0, true, retake));
      match.rounds.push_back(std::move(round));
    }
    out.push_back(std::move(match));
  }
  // Same situations ending in a way the retake filter excludes.
  MatchRecord noise = out[0];
  noise.match_id = "retake3";
  noise.rounds.resize(4);
  for (auto& r : noise.rounds) {
    r.match_id = noise.match_id;
    for (auto& f : r.frames) f.round_ref.match_id = noise.match_id;
    r.winner = Side::CT;
    r.end_reason = EndReason::elimination_t;
  }
  out.push_back(std::move(noise));
  return out;
}

MatchRecord ninety_frame_match(const MeshCatalog& catalog) {
  const NavMesh& mesh = catalog.at("de_dust_s");
  MatchRecord match;
  match.match_id = "fixture90";
  match.date = "2020-06-01";
  match.competition_name = "Fixture League";
  match.team_ct_start = "Cinder";
  match.team_t_start = "Drift";
  match.map = mesh.map_name();
  const std::vector<std::string> t_path{"TSpawn", "OutsideLong", "LongDoors", "LongA", "BombsiteA"};
  const std::vector<std::string> ct_path{"CTSpawn", "ARamp", "BombsiteA", "Catwalk", "ShortStairs"};
  for (int r = 1; r <= 2; ++r) {
    RoundRecord round;
    round.match_id = match.match_id;
    round.round_number = r;
    std::tie(round.ct_team, round.t_team) = default_round_teams(match, r);
    round.winner = r == 1 ? Side::T : Side::CT;
    round.end_reason = r == 1 ? EndReason::bomb_exploded : EndReason::time_expired;
    round.ct_buy = r == 1 ? BuyType::pistol : BuyType::semi_buy;
    round.t_buy = r == 1 ? BuyType::pistol : BuyType::eco;
    round.score_ct = 0;
    round.score_t = r == 1 ? 0 : 1;
    if (r == 1) round.bomb_plant_t = 50.0;
    for (int t = 0; t < 90; ++t) {
      std::vector<PlayerSnapshot> players;
      for (int k = 0; k < 5; ++k) {
        const std::size_t step = std::min<std::size_t>(t_path.size() - 1, std::size_t(t / 18));
        const int t_hp = (r == 1 && k < 3 && t >= 60 + k * 5) ? 0 : 100 - t % 7;
        players.push_back(player(round.t_team + "#" + std::to_string(k), Side::T,
                                 place_point(mesh, t_path[step], k * 4.0 + t * 0.5), t_hp));
        players.push_back(player(round.ct_team + "#" + std::to_string(k), Side::CT,
                                 place_point(mesh, ct_path[(k + t / 30) % ct_path.size()], k * 4.0), 100));
      }
      round.frames.push_back(frame(match.map, round.ref(), t, r == 1 && t >= 50, std::move(players)));
    }
    auto event = [&](EventKind kind, double t, std::string actor, std::optional<std::string> victim) {
      return EventRecord{kind, t, std::move(actor), std::move(victim), place_point(mesh, "LongA")};
    };
    if (r == 1) {
      for (int k = 0; k < 3; ++k)
        round.kills.push_back(event(EventKind::kill, 60 + k * 5, round.ct_team + "#0", round.t_team + "#" + std::to_string(k)));
      for (int k = 0; k < 4; ++k) round.grenades.push_back(event(EventKind::grenade, 10 + k * 7, round.t_team + "#1", {}));
      for (int k = 0; k < 5; ++k)
        round.damages.push_back(event(EventKind::damage, 55 + k, round.ct_team + "#2", round.t_team + "#0"));
      round.bomb_plants.push_back(event(EventKind::bomb_plant, 50, round.t_team + "#4", {}));
    } else {
      round.kills.push_back(event(EventKind::kill, 12, round.t_team + "#2", round.ct_team + "#4"));
      round.kills.push_back(event(EventKind::kill, 30, round.ct_team + "#1", round.t_team + "#3"));
      round.grenades.push_back(event(EventKind::grenade, 5, round.ct_team + "#3", {}));
    }
    match.rounds.push_back(std::move(round));
  }
  return match;
}

GameState random_state(const NavMesh& mesh, std::mt19937_64& rng) {
  const Rect e = mesh.extent();
  std::uniform_real_distribution<double> ux(e.x_min - 100, e.x_max + 100), uy(e.y_min - 100, e.y_max + 100),
      uz(-20, 220);
  std::uniform_int_distribution<int> count(0, 5), hp(-60, 100);
  GameState s;
  s.map = mesh.map_name();
  s.round_ref = {"random", 1};
  s.t = std::uniform_int_distribution<int>(0, 114)(rng);
  for (Side side : {Side::T, Side::CT}) {
    const int n = count(rng);
    for (int k = 0; k < n; ++k)
      s.players.push_back(player(std::string(to_string(side)) + std::to_string(k), side, {ux(rng), uy(rng), uz(rng)},
                                 std::max(0, hp(rng))));
  }
  return s;
}

Token random_token(std::size_t places, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> c(0, 5);
  Token t;
  for (std::size_t i = 0; i < places; ++i) {
    t.t_side.counts.push_back(std::uint16_t(c(rng) * c(rng) / 5));
    t.ct_side.counts.push_back(std::uint16_t(c(rng) * c(rng) / 5));
  }
  return t;
}

FilterSpec random_filter(const StateStore& store, std::mt19937_64& rng, double density) {
  std::bernoulli_distribution on(density), coin(0.5);
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  auto subset = [&](auto... values) {
    using E = std::common_type_t<decltype(values)...>;
    std::vector<E> out;
    for (E v : {values...})
      if (coin(rng)) out.push_back(v);
    return out;
  };
  FilterSpec f;
  const auto& d = store.data();
  if (on(rng)) {
    f.team = pick(8) == 0 || d.teams.empty() ? std::string("Nobody") : d.teams[pick(d.teams.size())];
    if (coin(rng)) f.team_side = coin(rng) ? Side::T : Side::CT;
  }
  if (on(rng)) f.ct_buy = subset(BuyType::pistol, BuyType::eco, BuyType::semi_buy, BuyType::full_buy);
  if (on(rng)) f.t_buy = subset(BuyType::pistol, BuyType::eco, BuyType::semi_buy, BuyType::full_buy);
  if (on(rng)) f.min_grenades_ct = int(pick(8));
  if (on(rng)) f.min_grenades_t = int(pick(8));
  if (on(rng))
    f.end_reasons = subset(EndReason::elimination_t, EndReason::elimination_ct, EndReason::bomb_exploded,
                           EndReason::bomb_defused, EndReason::time_expired);
  if (on(rng)) f.bomb_planted = coin(rng);
  if (on(rng) && !d.matches.empty()) {
    std::string a = d.matches[pick(d.matches.size())].date, b = d.matches[pick(d.matches.size())].date;
    if (b < a) std::swap(a, b);
    if (coin(rng)) f.date_from = a;
    if (coin(rng)) f.date_to = b;
  }
  return f;
}

QuerySpec random_query(const StateStore& store, std::mt19937_64& rng, QueryMode mode, double jitter,
                       double filter_density) {
  std::uniform_real_distribution<double> wobble(-jitter, jitter);
  const StateIndex i = std::uniform_int_distribution<StateIndex>(0, StateIndex(store.state_count() - 1))(rng);
  const GameState s = store.state(i);
  QuerySpec q;
  q.map = s.map;
  q.mode = mode;
  for (const auto& p : s.players)
    if (p.alive) q.sketch.push_back({p.side, {p.position.x + wobble(rng), p.position.y + wobble(rng), p.position.z}});
  if (mode == QueryMode::partial) {
    std::shuffle(q.sketch.begin(), q.sketch.end(), rng);
    if (q.sketch.size() > 1)
      q.sketch.resize(std::uniform_int_distribution<std::size_t>(1, std::min<std::size_t>(4, q.sketch.size()))(rng));
  }
  q.filters = random_filter(store, rng, filter_density);
  return q;
}

std::vector<MatchRecord> synth(int matches, int rounds, std::uint64_t seed) {
  static std::map<std::tuple<int, int, std::uint64_t>, std::vector<MatchRecord>> cache;
  auto key = std::make_tuple(matches, rounds, seed);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  SynthConfig config;
  config.matches = matches;
  config.rounds_per_match = rounds;
  static const MeshCatalog catalog = meshes();
  return cache[key] = synth_generate(config, seed, catalog);
}

}  // namespace fixtures
