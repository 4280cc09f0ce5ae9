#include "statedex/ingest.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

#include "statedex/error.hpp"

namespace statedex {

using nlohmann::json;

BuyType classify_buy(int side_equipment_total, int round_number,
                     const BuyThresholds& thresholds) {
  const auto& pistols = thresholds.pistol_rounds;
  if (std::find(pistols.begin(), pistols.end(), round_number) != pistols.end())
    return BuyType::pistol;
  if (side_equipment_total < thresholds.eco_below) return BuyType::eco;
  if (side_equipment_total < thresholds.full_buy_from) return BuyType::semi_buy;
  return BuyType::full_buy;
}

namespace {

// Round-level problems are reported with this type so the caller can drop
// just the round.
struct RoundRejected {
  std::string reason;
};

[[noreturn]] void reject(std::string reason) { throw RoundRejected{std::move(reason)}; }

const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

std::string top_string(const json& doc, const char* key) {
  const json* v = find(doc, key);
  if (!v || !v->is_string()) throw ParseError(std::string("missing or non-string field '") + key + "'");
  return v->get<std::string>();
}

double num(const json& obj, const char* key, const char* what) {
  const json* v = find(obj, key);
  if (!v || !v->is_number()) reject(std::string(what) + ": missing or non-numeric '" + key + "'");
  return v->get<double>();
}

int integer(const json& obj, const char* key, const char* what) {
  const json* v = find(obj, key);
  if (!v || !v->is_number_integer())
    reject(std::string(what) + ": missing or non-integer '" + key + "'");
  return v->get<int>();
}

int integer_or(const json& obj, const char* key, int fallback, const char* what) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number_integer()) reject(std::string(what) + ": non-integer '" + key + "'");
  return v->get<int>();
}

std::string str(const json& obj, const char* key, const char* what) {
  const json* v = find(obj, key);
  if (!v || !v->is_string()) reject(std::string(what) + ": missing or non-string '" + key + "'");
  return v->get<std::string>();
}

Vec3 position(const json& obj, const char* what) {
  return {num(obj, "x", what), num(obj, "y", what), num(obj, "z", what)};
}

PlayerSnapshot parse_player(const json& p) {
  if (!p.is_object()) reject("player entry is not an object");
  PlayerSnapshot s;
  s.player_id = str(p, "player_id", "player");
  auto side = parse_side(str(p, "side", "player"));
  if (!side) reject("player " + s.player_id + ": side must be T or CT");
  s.side = *side;
  s.position = position(p, "player");
  s.hp = integer(p, "hp", "player");
  s.armor = integer_or(p, "armor", 0, "player");
  s.equipment_value = integer_or(p, "equipment_value", 0, "player");
  s.grenade_count = integer_or(p, "grenade_count", 0, "player");
  if (s.hp < 0 || s.hp > 100) reject("player " + s.player_id + ": hp out of range 0-100");
  if (s.armor < 0) reject("player " + s.player_id + ": negative armor");
  if (s.equipment_value < 0) reject("player " + s.player_id + ": negative equipment_value");
  if (s.grenade_count < 0 || s.grenade_count > 4)
    reject("player " + s.player_id + ": grenade_count out of range 0-4");
  s.alive = s.hp > 0;
  if (const json* a = find(p, "alive")) {
    if (!a->is_boolean() || a->get<bool>() != s.alive)
      reject("player " + s.player_id + ": alive flag disagrees with hp");
  }
  return s;
}

std::vector<EventRecord> parse_events(const json& round, const char* key, EventKind kind,
                                      double max_t) {
  std::vector<EventRecord> out;
  const json* arr = find(round, key);
  if (!arr) return out;
  if (!arr->is_array()) reject(std::string("'") + key + "' must be an array");
  for (const auto& e : *arr) {
    if (!e.is_object()) reject(std::string(key) + " entry is not an object");
    EventRecord ev;
    ev.kind = kind;
    ev.t = num(e, "t", key);
    ev.actor_id = str(e, "actor_id", key);
    if (const json* v = find(e, "victim_id")) {
      if (!v->is_string()) reject(std::string(key) + ": victim_id must be a string");
      ev.victim_id = v->get<std::string>();
    }
    ev.position = position(e, key);
    if (ev.t < 0.0 || ev.t > max_t)
      reject(std::string(key) + " event at t=" + std::to_string(ev.t) +
             " lies outside the round");
    out.push_back(std::move(ev));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const EventRecord& a, const EventRecord& b) { return a.t < b.t; });
  return out;
}

RoundRecord parse_round(const json& r, const MatchRecord& match, int expected_number,
                        const IngestOptions& options) {
  if (!r.is_object()) reject("round entry is not an object");
  RoundRecord round;
  round.match_id = match.match_id;
  round.round_number = integer(r, "round_number", "round");
  if (round.round_number != expected_number)
    reject("round numbers are not contiguous: expected " + std::to_string(expected_number) +
           ", found " + std::to_string(round.round_number));

  auto winner = parse_side(str(r, "winner", "round"));
  if (!winner) reject("winner must be T or CT");
  round.winner = *winner;
  auto reason = parse_end_reason(str(r, "end_reason", "round"));
  if (!reason) reject("unknown end_reason");
  round.end_reason = *reason;
  if (winner_of(round.end_reason) != round.winner) reject("winner/end_reason mismatch");

  auto [ct_team, t_team] = default_round_teams(match, round.round_number);
  round.ct_team = find(r, "ct_team") ? str(r, "ct_team", "round") : ct_team;
  round.t_team = find(r, "t_team") ? str(r, "t_team", "round") : t_team;
  round.score_ct = integer_or(r, "score_ct", 0, "round");
  round.score_t = integer_or(r, "score_t", 0, "round");
  if (round.score_ct < 0 || round.score_t < 0) reject("negative score");
  if (find(r, "bomb_plant_t")) {
    round.bomb_plant_t = num(r, "bomb_plant_t", "round");
    if (*round.bomb_plant_t < 0.0) reject("negative bomb_plant_t");
  }

  const json* frames = find(r, "frames");
  if (!frames || !frames->is_array()) reject("'frames' must be an array");
  double last_raw = -1.0;
  std::optional<double> last_kept;
  for (const auto& f : *frames) {
    if (!f.is_object()) reject("frame entry is not an object");
    const double t = num(f, "t", "frame");
    if (t < 0.0) reject("negative frame time");
    if (t <= last_raw) reject("non-monotonic frame times at t=" + std::to_string(t));
    last_raw = t;
    if (last_kept && t - *last_kept < options.frame_interval - 1e-9) continue;
    last_kept = t;

    GameState state;
    state.map = match.map;
    state.round_ref = round.ref();
    state.t = t;
    if (const json* b = find(f, "bomb_planted")) {
      if (!b->is_boolean()) reject("frame bomb_planted must be boolean");
      state.bomb_planted = b->get<bool>();
    }
    const json* players = find(f, "players");
    if (!players || !players->is_array()) reject("frame 'players' must be an array");
    std::array<int, 2> per_side{0, 0};
    for (const auto& p : *players) {
      state.players.push_back(parse_player(p));
      if (++per_side[static_cast<int>(state.players.back().side)] > 5)
        reject("more than 5 players on one side at t=" + std::to_string(t));
      for (std::size_t k = 0; k + 1 < state.players.size(); ++k)
        if (state.players[k].player_id == state.players.back().player_id)
          reject("duplicate player " + state.players.back().player_id + " at t=" + std::to_string(t));
    }
    round.frames.push_back(std::move(state));
  }
  if (round.frames.empty()) reject("round has no frames");

  const double max_t = last_raw + options.frame_interval;
  round.kills = parse_events(r, "kills", EventKind::kill, max_t);
  round.grenades = parse_events(r, "grenades", EventKind::grenade, max_t);
  round.damages = parse_events(r, "damages", EventKind::damage, max_t);
  round.bomb_plants = parse_events(r, "bomb_plants", EventKind::bomb_plant, max_t);

  auto side_total = [&](Side side) {
    int total = 0;
    for (const auto& p : round.frames.front().players)
      if (p.side == side) total += p.equipment_value;
    return total;
  };
  auto buy = [&](const char* key, Side side) {
    if (const json* v = find(r, key)) {
      if (!v->is_string()) reject(std::string(key) + " must be a string");
      auto parsed = parse_buy_type(v->get<std::string>());
      if (!parsed) reject(std::string("unknown ") + key);
      return *parsed;
    }
    return classify_buy(side_total(side), round.round_number, options.buy);
  };
  round.ct_buy = buy("ct_buy", Side::CT);
  round.t_buy = buy("t_buy", Side::T);
  return round;
}

json render_position(json obj, const Vec3& p) {
  obj["x"] = p.x;
  obj["y"] = p.y;
  obj["z"] = p.z;
  return obj;
}

json render_events(const std::vector<EventRecord>& events) {
  json arr = json::array();
  for (const auto& e : events) {
    json obj = {{"t", e.t}, {"actor_id", e.actor_id}};
    if (e.victim_id) obj["victim_id"] = *e.victim_id;
    arr.push_back(render_position(std::move(obj), e.position));
  }
  return arr;
}

}  // namespace

ParseResult parse_match(const json& doc, const IngestOptions& options) {
  if (!doc.is_object()) throw ParseError("replay document is not an object");
  ParseResult result;
  MatchRecord& match = result.match;
  match.match_id = top_string(doc, "match_id");
  match.date = top_string(doc, "date");
  match.competition_name = top_string(doc, "competition_name");
  match.map = top_string(doc, "map");
  const json* teams = find(doc, "teams");
  if (!teams || !teams->is_object()) throw ParseError("missing 'teams' object");
  match.team_ct_start = top_string(*teams, "ct_start");
  match.team_t_start = top_string(*teams, "t_start");
  const json* rounds = find(doc, "rounds");
  if (!rounds || !rounds->is_array()) throw ParseError("missing 'rounds' array");

  int expected = 1;
  for (const auto& r : *rounds) {
    try {
      match.rounds.push_back(parse_round(r, match, expected, options));
    } catch (const RoundRejected& e) {
      ++result.rejected_rounds;
      result.diagnostics.push_back(match.match_id + " round " + std::to_string(expected) + ": " +
                                   e.reason);
    } catch (const json::exception& e) {
      ++result.rejected_rounds;
      result.diagnostics.push_back(match.match_id + " round " + std::to_string(expected) + ": " +
                                   e.what());
    }
    ++expected;
  }
  return result;
}

ParseResult parse_match_file(const std::filesystem::path& path, const IngestOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  try {
    return parse_match(doc, options);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

json render_match(const MatchRecord& match) {
  json rounds = json::array();
  for (const auto& r : match.rounds) {
    json frames = json::array();
    for (const auto& f : r.frames) {
      json players = json::array();
      for (const auto& p : f.players) {
        players.push_back(render_position({{"player_id", p.player_id},
                                           {"side", to_string(p.side)},
                                           {"hp", p.hp},
                                           {"armor", p.armor},
                                           {"equipment_value", p.equipment_value},
                                           {"grenade_count", p.grenade_count}},
                                          p.position));
      }
      frames.push_back({{"t", f.t}, {"bomb_planted", f.bomb_planted}, {"players", players}});
    }
    json round = {{"round_number", r.round_number},
                  {"winner", to_string(r.winner)},
                  {"end_reason", to_string(r.end_reason)},
                  {"ct_team", r.ct_team},
                  {"t_team", r.t_team},
                  {"ct_buy", to_string(r.ct_buy)},
                  {"t_buy", to_string(r.t_buy)},
                  {"score_ct", r.score_ct},
                  {"score_t", r.score_t},
                  {"bomb_plant_t", r.bomb_plant_t ? json(*r.bomb_plant_t) : json(nullptr)},
                  {"frames", frames},
                  {"kills", render_events(r.kills)},
                  {"grenades", render_events(r.grenades)},
                  {"damages", render_events(r.damages)},
                  {"bomb_plants", render_events(r.bomb_plants)}};
    rounds.push_back(std::move(round));
  }
  return {{"match_id", match.match_id},
          {"date", match.date},
          {"competition_name", match.competition_name},
          {"map", match.map},
          {"teams", {{"ct_start", match.team_ct_start}, {"t_start", match.team_t_start}}},
          {"rounds", rounds}};
}

std::vector<std::string> validate_match(const MatchRecord& match) {
  std::vector<std::string> problems;
  auto fail = [&](const RoundRecord& r, const std::string& what) {
    problems.push_back(match.match_id + " round " + std::to_string(r.round_number) + ": " + what);
  };
  for (std::size_t i = 0; i < match.rounds.size(); ++i) {
    const auto& r = match.rounds[i];
    if (r.round_number != static_cast<int>(i) + 1) fail(r, "round numbers not contiguous");
    if (r.match_id != match.match_id) fail(r, "match_id mismatch");
    if (winner_of(r.end_reason) != r.winner) fail(r, "winner/end_reason mismatch");
    double prev = -1.0;
    for (const auto& f : r.frames) {
      if (f.t <= prev) fail(r, "frames not strictly increasing");
      if (f.t < 0.0) fail(r, "negative frame time");
      prev = f.t;
      if (f.map != match.map) fail(r, "frame map mismatch");
      if (f.round_ref != r.ref()) fail(r, "frame round_ref mismatch");
      std::array<int, 2> per_side{0, 0};
      for (const auto& p : f.players) {
        if (p.alive != (p.hp > 0)) fail(r, "alive/hp mismatch for " + p.player_id);
        if (p.hp < 0 || p.hp > 100) fail(r, "hp out of range for " + p.player_id);
        if (p.armor < 0) fail(r, "negative armor for " + p.player_id);
        if (p.grenade_count < 0 || p.grenade_count > 4)
          fail(r, "grenade_count out of range for " + p.player_id);
        ++per_side[static_cast<int>(p.side)];
      }
      if (per_side[0] > 5 || per_side[1] > 5) fail(r, "more than 5 players per side");
    }
    const double max_t = r.frames.empty() ? 0.0 : r.frames.back().t + 1.0;
    for (const auto* events : {&r.kills, &r.grenades, &r.damages, &r.bomb_plants})
      for (const auto& e : *events)
        if (e.t < 0.0 || e.t > max_t) fail(r, "event outside round duration");
  }
  return problems;
}

}  // namespace statedex
