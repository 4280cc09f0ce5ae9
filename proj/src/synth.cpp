#include "statedex/synth.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <random>
#include <set>

#include "statedex/error.hpp"

namespace statedex {

using nlohmann::json;

namespace {

constexpr double kRoundSeconds = 115.0;
constexpr double kBombSeconds = 35.0;
constexpr int kPlayersPerSide = 5;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Distribution helpers built on raw engine output so corpora are identical
// across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) {
    return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  bool chance(double p) { return uniform() < p; }
  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(integer(0, static_cast<int>(v.size()) - 1))];
  }

 private:
  std::mt19937_64 engine_;
};

double round2(double v) { return std::round(v * 100.0) / 100.0; }

std::string add_days(const std::string& iso, int days) {
  int y = 0;
  unsigned m = 0, d = 0;
  if (std::sscanf(iso.c_str(), "%d-%u-%u", &y, &m, &d) != 3)
    throw ParseError("start_date must be YYYY-MM-DD");
  using namespace std::chrono;
  const year_month_day start{year{y}, month{m}, day{d}};
  if (!start.ok()) throw ParseError("start_date is not a valid date");
  const year_month_day out{sys_days{start} + std::chrono::days{days}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(out.year()), unsigned(out.month()),
                unsigned(out.day()));
  return buf;
}

struct SimPlayer {
  std::string id;
  Side side = Side::T;
  PlaceId place = 0;
  PlaceId goal = 0;
  std::size_t area = 0;  // index into mesh.areas()
  Vec3 pos;
  int hp = 100;
  int armor = 0;
  int equipment = 0;
  int grenades = 0;

  bool alive() const { return hp > 0; }
};

// Mesh-derived data the simulation needs: areas per place and a next-hop
// table over place adjacency.
struct MapModel {
  const NavMesh* mesh = nullptr;
  std::vector<std::vector<std::size_t>> areas_of;
  std::vector<std::vector<PlaceId>> adjacency;
  std::vector<std::vector<PlaceId>> next_hop;  // [from][to]
  PlaceId t_spawn = 0;
  PlaceId ct_spawn = 0;
  std::vector<PlaceId> sites;

  explicit MapModel(const NavMesh& m) : mesh(&m) {
    const std::size_t n = m.place_count();
    areas_of.resize(n);
    for (std::size_t i = 0; i < m.areas().size(); ++i)
      areas_of[static_cast<std::size_t>(m.areas()[i].place_id)].push_back(i);
    adjacency = m.place_adjacency();
    next_hop.assign(n, std::vector<PlaceId>(n, -1));
    for (std::size_t target = 0; target < n; ++target) {
      // BFS from the target; the parent of each node points one step closer.
      std::deque<PlaceId> queue{static_cast<PlaceId>(target)};
      next_hop[target][target] = static_cast<PlaceId>(target);
      while (!queue.empty()) {
        const PlaceId cur = queue.front();
        queue.pop_front();
        for (PlaceId nb : adjacency[static_cast<std::size_t>(cur)]) {
          auto& hop = next_hop[static_cast<std::size_t>(nb)][target];
          if (hop != -1) continue;
          hop = cur;
          queue.push_back(nb);
        }
      }
    }
    const PlaceId ts = m.find_place("TSpawn");
    const PlaceId cts = m.find_place("CTSpawn");
    t_spawn = ts >= 0 ? ts : 0;
    ct_spawn = cts >= 0 ? cts : static_cast<PlaceId>(n - 1);
    for (const auto& p : m.places())
      if (p.name.rfind("Bombsite", 0) == 0) sites.push_back(p.place_id);
  }

  PlaceId step_toward(PlaceId from, PlaceId to) const {
    const PlaceId hop = next_hop[static_cast<std::size_t>(from)][static_cast<std::size_t>(to)];
    return hop < 0 ? from : hop;
  }
};

void enter_place(SimPlayer& p, PlaceId place, const MapModel& map, Rng& rng) {
  const auto& candidates = map.areas_of[static_cast<std::size_t>(place)];
  p.place = place;
  if (candidates.empty()) return;
  p.area = rng.pick(candidates);
  const NavArea& a = map.mesh->areas()[p.area];
  p.pos = {round2(rng.uniform(a.bounds.x_min, a.bounds.x_max)),
           round2(rng.uniform(a.bounds.y_min, a.bounds.y_max)),
           round2(a.z_center + rng.uniform(-8.0, 8.0))};
}

void jitter(SimPlayer& p, const MapModel& map, Rng& rng) {
  const NavArea& a = map.mesh->areas()[p.area];
  p.pos.x = std::clamp(round2(p.pos.x + rng.uniform(-40.0, 40.0)), a.bounds.x_min, a.bounds.x_max);
  p.pos.y = std::clamp(round2(p.pos.y + rng.uniform(-40.0, 40.0)), a.bounds.y_min, a.bounds.y_max);
}

struct TeamState {
  std::string name;
  int bank = 4000;
  int score = 0;
};

struct Loadout {
  int equip_lo, equip_hi, grenades_lo, grenades_hi, armor;
};

Loadout choose_loadout(int round_number, int bank, const BuyThresholds& buy) {
  const auto& pistols = buy.pistol_rounds;
  if (std::find(pistols.begin(), pistols.end(), round_number) != pistols.end())
    return {200, 850, 0, 1, 0};
  if (bank >= 24000) return {4400, 5600, 2, 4, 100};
  if (bank >= 11000) return {1800, 3600, 1, 2, 100};
  return {200, 900, 0, 1, 0};
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

SynthConfig SynthConfig::from_json(const json& doc) {
  if (!doc.is_object()) throw ParseError("synth config must be an object");
  static const std::set<std::string> known{"matches", "rounds_per_match", "teams", "maps",
                                           "competitions", "start_date", "buy_thresholds"};
  for (const auto& [key, value] : doc.items())
    if (!known.count(key)) throw ParseError("synth config: unknown field '" + key + "'");
  SynthConfig c;
  try {
    c.matches = doc.value("matches", c.matches);
    c.rounds_per_match = doc.value("rounds_per_match", c.rounds_per_match);
    c.teams = doc.value("teams", c.teams);
    c.maps = doc.value("maps", c.maps);
    c.competitions = doc.value("competitions", c.competitions);
    c.start_date = doc.value("start_date", c.start_date);
    if (doc.contains("buy_thresholds")) {
      const auto& b = doc["buy_thresholds"];
      c.buy.eco_below = b.value("eco_below", c.buy.eco_below);
      c.buy.full_buy_from = b.value("full_buy_from", c.buy.full_buy_from);
      c.buy.pistol_rounds = b.value("pistol_rounds", c.buy.pistol_rounds);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("synth config: ") + e.what());
  }
  if (c.matches < 0) throw ParseError("synth config: matches must be >= 0");
  if (c.rounds_per_match < 1 || c.rounds_per_match > 30)
    throw ParseError("synth config: rounds_per_match must be in 1..30");
  if (c.teams.size() < 2) throw ParseError("synth config: need at least two teams");
  if (c.maps.empty()) throw ParseError("synth config: need at least one map");
  if (c.competitions.empty()) throw ParseError("synth config: need at least one competition");
  if (c.buy.eco_below > c.buy.full_buy_from)
    throw ParseError("synth config: eco_below exceeds full_buy_from");
  add_days(c.start_date, 0);
  return c;
}

json SynthConfig::to_json() const {
  return {{"matches", matches},
          {"rounds_per_match", rounds_per_match},
          {"teams", teams},
          {"maps", maps},
          {"competitions", competitions},
          {"start_date", start_date},
          {"buy_thresholds",
           {{"eco_below", buy.eco_below},
            {"full_buy_from", buy.full_buy_from},
            {"pistol_rounds", buy.pistol_rounds}}}};
}

SynthGenerator::SynthGenerator(SynthConfig config, std::uint64_t seed, const MeshCatalog& meshes)
    : config_(std::move(config)), seed_(seed), meshes_(meshes) {
  for (const auto& m : config_.maps)
    if (meshes_.find(m) == meshes_.end()) throw UnknownMapError(m);
}

MatchRecord SynthGenerator::generate(int index) const {
  Rng rng(splitmix64(seed_ ^ splitmix64(static_cast<std::uint64_t>(index) + 1)));
  const std::string& map_name = config_.maps[static_cast<std::size_t>(index) % config_.maps.size()];
  const MapModel map(meshes_.find(map_name)->second);

  MatchRecord match;
  char id[32];
  std::snprintf(id, sizeof id, "m%06d", index);
  match.match_id = id;
  match.map = map_name;
  match.date = add_days(config_.start_date, index / 4);
  match.competition_name = rng.pick(config_.competitions);
  const int a = rng.integer(0, static_cast<int>(config_.teams.size()) - 1);
  int b = rng.integer(0, static_cast<int>(config_.teams.size()) - 2);
  if (b >= a) ++b;
  match.team_ct_start = config_.teams[static_cast<std::size_t>(a)];
  match.team_t_start = config_.teams[static_cast<std::size_t>(b)];

  TeamState team_a{match.team_ct_start};
  TeamState team_b{match.team_t_start};

  for (int rn = 1; rn <= config_.rounds_per_match; ++rn) {
    const bool first_half = rn <= 15;
    TeamState& ct = first_half ? team_a : team_b;
    TeamState& tt = first_half ? team_b : team_a;
    const auto& pistols = config_.buy.pistol_rounds;
    if (std::find(pistols.begin(), pistols.end(), rn) != pistols.end()) {
      team_a.bank = team_b.bank = 4000;
    }

    RoundRecord round;
    round.match_id = match.match_id;
    round.round_number = rn;
    round.ct_team = ct.name;
    round.t_team = tt.name;
    round.score_ct = ct.score;
    round.score_t = tt.score;

    std::vector<SimPlayer> players;
    std::array<int, 2> totals{0, 0};
    for (Side side : {Side::T, Side::CT}) {
      TeamState& team = side == Side::T ? tt : ct;
      const Loadout lo = choose_loadout(rn, team.bank, config_.buy);
      for (int k = 0; k < kPlayersPerSide; ++k) {
        SimPlayer p;
        p.id = team.name + "#" + std::to_string(k + 1);
        p.side = side;
        p.equipment = rng.integer(lo.equip_lo / 50, lo.equip_hi / 50) * 50;
        p.grenades = rng.integer(lo.grenades_lo, lo.grenades_hi);
        p.armor = lo.armor;
        enter_place(p, side == Side::T ? map.t_spawn : map.ct_spawn, map, rng);
        totals[static_cast<int>(side)] += p.equipment;
        players.push_back(std::move(p));
      }
      team.bank = std::max(0, team.bank - totals[static_cast<int>(side)]);
    }
    round.t_buy = classify_buy(totals[0], rn, config_.buy);
    round.ct_buy = classify_buy(totals[1], rn, config_.buy);

    // Goals: T players converge on one site, CT players anchor around the map.
    const PlaceId t_site = map.sites.empty() ? map.ct_spawn : rng.pick(map.sites);
    for (auto& p : players) {
      if (p.side == Side::T) {
        p.goal = rng.chance(0.75) ? t_site
                                  : static_cast<PlaceId>(rng.integer(
                                        0, static_cast<int>(map.mesh->place_count()) - 1));
      } else {
        p.goal = !map.sites.empty() && rng.chance(0.6)
                     ? rng.pick(map.sites)
                     : static_cast<PlaceId>(
                           rng.integer(0, static_cast<int>(map.mesh->place_count()) - 1));
      }
    }
    const bool will_plant = rng.chance(0.65);
    const double plant_at = rng.uniform(35.0, 95.0);

    auto alive = [&](Side side) {
      return static_cast<int>(std::count_if(players.begin(), players.end(), [&](const SimPlayer& p) {
        return p.side == side && p.alive();
      }));
    };
    auto alive_equip = [&](Side side) {
      double sum = 0.0;
      int n = 0;
      for (const auto& p : players)
        if (p.side == side && p.alive()) {
          sum += p.equipment;
          ++n;
        }
      return n ? sum / n : 0.0;
    };
    auto random_alive = [&](Side side) -> SimPlayer* {
      std::vector<SimPlayer*> pool;
      for (auto& p : players)
        if (p.side == side && p.alive()) pool.push_back(&p);
      return pool.empty() ? nullptr : pool[static_cast<std::size_t>(
                                          rng.integer(0, static_cast<int>(pool.size()) - 1))];
    };
    auto snapshot = [&](double t, bool planted) {
      GameState s;
      s.map = map_name;
      s.round_ref = round.ref();
      s.t = t;
      s.bomb_planted = planted;
      for (const auto& p : players)
        s.players.push_back(PlayerSnapshot{p.id, p.side, p.pos, p.hp, p.armor, p.equipment,
                                           p.grenades, p.alive()});
      return s;
    };

    bool planted = false;
    std::optional<double> defuse_at;
    std::optional<EndReason> end;
    round.frames.push_back(snapshot(0.0, false));
    for (int s = 1; !end; ++s) {
      const double t = s;
      for (auto& p : players) {
        if (!p.alive()) continue;
        if (rng.chance(0.12)) {
          const PlaceId next =
              rng.chance(0.7) ? map.step_toward(p.place, p.goal)
                              : (map.adjacency[static_cast<std::size_t>(p.place)].empty()
                                     ? p.place
                                     : rng.pick(map.adjacency[static_cast<std::size_t>(p.place)]));
          if (next != p.place) {
            enter_place(p, next, map, rng);
            continue;
          }
        }
        jitter(p, map, rng);
      }

      if (will_plant && !planted && t >= plant_at && !map.sites.empty()) {
        if (SimPlayer* planter = random_alive(Side::T)) {
          enter_place(*planter, t_site, map, rng);
          planted = true;
          round.bomb_plant_t = t;
          round.bomb_plants.push_back({EventKind::bomb_plant, t, planter->id, std::nullopt,
                                       planter->pos});
        }
      }

      const int ct_alive = alive(Side::CT);
      const int t_alive = alive(Side::T);
      if (ct_alive > 0 && t_alive > 0 && rng.chance(planted ? 0.09 : 0.05)) {
        const double z = 0.55 * (ct_alive - t_alive) +
                         0.45 * (alive_equip(Side::CT) - alive_equip(Side::T)) / 1000.0 -
                         (planted ? 0.1 : -0.2);
        const Side winner = rng.chance(sigmoid(z)) ? Side::CT : Side::T;
        SimPlayer* killer = random_alive(winner);
        SimPlayer* victim = random_alive(winner == Side::CT ? Side::T : Side::CT);
        round.damages.push_back({EventKind::damage, t, killer->id, victim->id, victim->pos});
        victim->hp = 0;
        round.kills.push_back({EventKind::kill, t, killer->id, victim->id, victim->pos});
      }
      if (rng.chance(0.06)) {
        const Side side = rng.chance(0.5) ? Side::CT : Side::T;
        SimPlayer* attacker = random_alive(side == Side::CT ? Side::T : Side::CT);
        SimPlayer* victim = random_alive(side);
        if (attacker && victim && victim->hp > 1) {
          victim->hp = std::max(1, victim->hp - rng.integer(8, 60));
          round.damages.push_back({EventKind::damage, t, attacker->id, victim->id, victim->pos});
        }
      }
      for (auto& p : players) {
        if (p.alive() && p.grenades > 0 && rng.chance(0.015)) {
          --p.grenades;
          round.grenades.push_back({EventKind::grenade, t, p.id, std::nullopt, p.pos});
        }
      }

      const int ct_left = alive(Side::CT);
      const int t_left = alive(Side::T);
      if (!planted) {
        if (t_left == 0) end = EndReason::elimination_t;
        else if (ct_left == 0) end = EndReason::elimination_ct;
        else if (t >= kRoundSeconds) end = EndReason::time_expired;
      } else {
        const double since = t - *round.bomb_plant_t;
        if (ct_left == 0) {
          end = EndReason::elimination_ct;
        } else {
          if (!defuse_at && (t_left == 0 || (ct_left > t_left && rng.chance(0.04))))
            defuse_at = t + rng.integer(5, 10);
          if (defuse_at && t >= *defuse_at && *defuse_at - *round.bomb_plant_t < kBombSeconds)
            end = EndReason::bomb_defused;
          else if (since >= kBombSeconds)
            end = EndReason::bomb_exploded;
        }
      }
      round.frames.push_back(snapshot(t, planted));
    }
    round.end_reason = *end;
    round.winner = winner_of(*end);

    TeamState& won = round.winner == Side::CT ? ct : tt;
    TeamState& lost = round.winner == Side::CT ? tt : ct;
    ++won.score;
    won.bank = std::min(80000, won.bank + 16250);
    lost.bank = std::min(80000, lost.bank + 9500 + (round.winner == Side::CT && planted ? 4000 : 0));
    match.rounds.push_back(std::move(round));
  }
  return match;
}

std::vector<MatchRecord> synth_generate(const SynthConfig& config, std::uint64_t seed,
                                        const MeshCatalog& meshes) {
  SynthGenerator gen(config, seed, meshes);
  std::vector<MatchRecord> out;
  out.reserve(static_cast<std::size_t>(config.matches));
  for (int i = 0; i < config.matches; ++i) out.push_back(gen.generate(i));
  return out;
}

}  // namespace statedex
