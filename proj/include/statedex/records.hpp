#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "statedex/types.hpp"

namespace statedex {

enum class BuyType : std::uint8_t { pistol, eco, semi_buy, full_buy };

enum class EndReason : std::uint8_t {
  elimination_t,   // T side eliminated, CT wins
  elimination_ct,  // CT side eliminated, T wins
  bomb_exploded,
  bomb_defused,
  time_expired,
};

enum class EventKind : std::uint8_t { kill, grenade, damage, bomb_plant };

std::string_view to_string(BuyType v);
std::string_view to_string(EndReason v);
std::string_view to_string(EventKind v);
std::optional<BuyType> parse_buy_type(std::string_view s);
std::optional<EndReason> parse_end_reason(std::string_view s);

/// The side an end reason forces to win.
Side winner_of(EndReason reason);

struct PlayerSnapshot {
  std::string player_id;
  Side side = Side::T;
  Vec3 position;
  int hp = 100;
  int armor = 0;
  int equipment_value = 0;
  int grenade_count = 0;
  bool alive = true;

  friend bool operator==(const PlayerSnapshot&, const PlayerSnapshot&) = default;
};

struct RoundRef {
  std::string match_id;
  int round_number = 0;

  friend bool operator==(const RoundRef&, const RoundRef&) = default;
  friend auto operator<=>(const RoundRef&, const RoundRef&) = default;
};

/// One snapshot of a round, sampled at one second resolution.
struct GameState {
  std::string map;
  RoundRef round_ref;
  double t = 0.0;
  std::vector<PlayerSnapshot> players;
  bool bomb_planted = false;

  friend bool operator==(const GameState&, const GameState&) = default;
};

struct EventRecord {
  EventKind kind = EventKind::kill;
  double t = 0.0;
  std::string actor_id;
  std::optional<std::string> victim_id;
  Vec3 position;

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

struct RoundRecord {
  std::string match_id;
  int round_number = 0;
  Side winner = Side::CT;
  EndReason end_reason = EndReason::time_expired;
  std::string ct_team;
  std::string t_team;
  BuyType ct_buy = BuyType::pistol;
  BuyType t_buy = BuyType::pistol;
  int score_ct = 0;
  int score_t = 0;
  std::optional<double> bomb_plant_t;
  std::vector<GameState> frames;
  std::vector<EventRecord> kills;
  std::vector<EventRecord> grenades;
  std::vector<EventRecord> damages;
  std::vector<EventRecord> bomb_plants;

  RoundRef ref() const { return {match_id, round_number}; }
  friend bool operator==(const RoundRecord&, const RoundRecord&) = default;
};

struct MatchRecord {
  std::string match_id;
  std::string date;  // ISO-8601 (YYYY-MM-DD)
  std::string competition_name;
  std::string team_ct_start;
  std::string team_t_start;
  std::string map;
  std::vector<RoundRecord> rounds;

  friend bool operator==(const MatchRecord&, const MatchRecord&) = default;
};

/// Team names for the CT and T side of a round when the document does not
/// list them: starting sides for rounds 1-15, swapped from round 16 on.
std::pair<std::string, std::string> default_round_teams(const MatchRecord& match,
                                                        int round_number);

}  // namespace statedex
