#include "statedex/records.hpp"

#include <array>

namespace statedex {

namespace {

constexpr std::array<std::string_view, 4> kBuyNames{"pistol", "eco", "semi_buy", "full_buy"};
constexpr std::array<std::string_view, 5> kEndNames{"elimination_t", "elimination_ct",
                                                    "bomb_exploded", "bomb_defused",
                                                    "time_expired"};
constexpr std::array<std::string_view, 4> kEventNames{"kill", "grenade", "damage", "bomb_plant"};

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<std::string_view, N>& names, std::string_view s) {
  for (std::size_t i = 0; i < N; ++i)
    if (names[i] == s) return static_cast<E>(i);
  return std::nullopt;
}

}  // namespace

std::string_view to_string(BuyType v) { return kBuyNames[static_cast<std::size_t>(v)]; }
std::string_view to_string(EndReason v) { return kEndNames[static_cast<std::size_t>(v)]; }
std::string_view to_string(EventKind v) { return kEventNames[static_cast<std::size_t>(v)]; }

std::optional<BuyType> parse_buy_type(std::string_view s) { return lookup<BuyType>(kBuyNames, s); }
std::optional<EndReason> parse_end_reason(std::string_view s) {
  return lookup<EndReason>(kEndNames, s);
}

Side winner_of(EndReason reason) {
  switch (reason) {
    case EndReason::elimination_ct:
    case EndReason::bomb_exploded:
      return Side::T;
    case EndReason::elimination_t:
    case EndReason::bomb_defused:
    case EndReason::time_expired:
      return Side::CT;
  }
  return Side::CT;
}

std::pair<std::string, std::string> default_round_teams(const MatchRecord& match,
                                                        int round_number) {
  if (round_number <= 15) return {match.team_ct_start, match.team_t_start};
  return {match.team_t_start, match.team_ct_start};
}

}  // namespace statedex
