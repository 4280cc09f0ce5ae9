#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "statedex/navmesh.hpp"
#include "statedex/records.hpp"
#include "statedex/tokenizer.hpp"

namespace statedex {

/// Position of a state in the store. States are numbered in chronological
/// order: (match_id, round_number, t).
using StateIndex = std::uint32_t;
using TokenId = std::uint32_t;

/// Public identity of a state, stable across snapshots.
struct StateRef {
  std::string match_id;
  int round_number = 0;
  double t = 0.0;

  friend bool operator==(const StateRef&, const StateRef&) = default;
  friend auto operator<=>(const StateRef&, const StateRef&) = default;
};

struct MatchMeta {
  std::string match_id;
  std::string date;
  std::string competition_name;
  std::string team_ct_start;
  std::string team_t_start;
  std::uint32_t map = 0;
  std::uint32_t first_round = 0;
  std::uint32_t end_round = 0;
};

struct RoundMeta {
  std::uint32_t match = 0;
  std::int32_t round_number = 0;
  Side winner = Side::CT;
  EndReason end_reason = EndReason::time_expired;
  std::uint32_t ct_team = 0;  // index into StoreData::teams
  std::uint32_t t_team = 0;
  BuyType ct_buy = BuyType::pistol;
  BuyType t_buy = BuyType::pistol;
  std::int32_t score_ct = 0;
  std::int32_t score_t = 0;
  std::optional<double> bomb_plant_t;
  StateIndex first_state = 0;
  StateIndex end_state = 0;
  std::vector<std::string> roster;  // player ids referenced by StoredPlayer::roster_slot
  std::vector<EventRecord> kills;
  std::vector<EventRecord> grenades;
  std::vector<EventRecord> damages;
  std::vector<EventRecord> bomb_plants;
};

struct StateRow {
  double t = 0.0;
  std::uint32_t round = 0;
  TokenId token = 0;
  std::uint32_t first_player = 0;
  std::uint8_t player_count = 0;
  bool bomb_planted = false;
};

struct StoredPlayer {
  Vec3 position;
  std::uint32_t roster_slot = 0;
  std::int32_t equipment_value = 0;
  std::int16_t hp = 0;
  std::int16_t armor = 0;
  Side side = Side::T;
  std::uint8_t grenade_count = 0;

  bool alive() const noexcept { return hp > 0; }
};

/// Distinct (map, token) pair. `counts` holds the T side's per-place
/// counts followed by the CT side's; every state referencing the row
/// shares these place-count columns.
struct TokenRow {
  std::uint32_t map = 0;
  std::vector<std::uint16_t> counts;
};

/// Raw columns of a store; what a snapshot persists.
struct StoreData {
  std::vector<NavMesh> meshes;     // sorted by map name
  std::vector<std::string> teams;  // sorted, unique
  std::vector<MatchMeta> matches;  // sorted by match_id
  std::vector<RoundMeta> rounds;   // sorted by (match, round_number)
  std::vector<StateRow> states;    // sorted by (round, t)
  std::vector<StoredPlayer> players;
  std::vector<TokenRow> tokens;    // numbered by first appearance in state order
};

/// Immutable indexed corpus. Concurrent reads are safe.
class StateStore {
 public:
  StateStore() = default;
  /// Validates the columns and derives the token index. Throws Error.
  explicit StateStore(StoreData data);

  const StoreData& data() const noexcept { return data_; }

  std::size_t state_count() const noexcept { return data_.states.size(); }
  std::size_t round_count() const noexcept { return data_.rounds.size(); }
  std::size_t match_count() const noexcept { return data_.matches.size(); }
  std::size_t token_count() const noexcept { return data_.tokens.size(); }

  /// Map index for `map`, or nullopt.
  std::optional<std::uint32_t> map_index(std::string_view map) const;
  /// Throws UnknownMapError.
  const NavMesh& mesh(std::string_view map) const;
  const NavMesh& mesh(std::uint32_t map_index) const { return data_.meshes.at(map_index); }

  const StateRow& row(StateIndex i) const { return data_.states[i]; }
  const RoundMeta& round_of(StateIndex i) const { return data_.rounds[data_.states[i].round]; }
  const MatchMeta& match_of(const RoundMeta& r) const { return data_.matches[r.match]; }
  std::span<const StoredPlayer> players(StateIndex i) const;
  const std::string& team(std::uint32_t idx) const { return data_.teams[idx]; }

  StateRef ref(StateIndex i) const;
  GameState state(StateIndex i) const;
  std::optional<StateIndex> find_state(const StateRef& ref) const;

  /// Token of state i, and its canonical string.
  Token token(StateIndex i) const { return token_of(data_.states[i].token); }
  const std::string& token_string(StateIndex i) const { return token_strings_[data_.states[i].token]; }
  Token token_of(TokenId id) const;
  const std::string& token_string_of(TokenId id) const { return token_strings_[id]; }
  const TokenRow& token_row(TokenId id) const { return data_.tokens[id]; }

  /// Per-place count column: players of `side` in place `token_position`.
  std::uint16_t place_count(StateIndex i, Side side, std::uint32_t token_position) const;

  /// States indexed under (map, token), ascending; empty for an unindexed
  /// token. Throws UnknownMapError.
  std::span<const StateIndex> lookup(std::string_view map, std::string_view token) const;
  std::span<const StateIndex> postings(TokenId id) const;
  /// All distinct tokens seen on a map.
  std::span<const TokenId> tokens_of_map(std::uint32_t map_index) const;

  std::optional<std::uint32_t> find_round(std::string_view match_id, int round_number) const;
  /// Full round with frames and events, as ingested.
  RoundRecord round_record(std::uint32_t round_index) const;

  /// Re-tokenizes every state and compares with its index key. Returns the
  /// number of mismatches.
  std::size_t verify_tokens() const;

 private:
  StoreData data_;
  std::vector<std::string> token_strings_;
  std::vector<std::unordered_map<std::string, TokenId>> token_lookup_;  // per map
  std::vector<std::vector<TokenId>> map_tokens_;
  std::vector<std::uint32_t> posting_offsets_;
  std::vector<StateIndex> posting_states_;
  std::unordered_map<std::string, std::uint32_t> match_lookup_;
};

/// Accumulates matches and produces a StateStore. Not thread-safe; the
/// store it returns is immutable.
class StoreBuilder {
 public:
  explicit StoreBuilder(MeshCatalog meshes);
  StoreBuilder(StoreBuilder&&) noexcept;
  StoreBuilder& operator=(StoreBuilder&&) noexcept;
  ~StoreBuilder();

  /// Tokenizes and stages every frame of `match`. Returns diagnostics for
  /// anything skipped: an unknown map or duplicate match_id skips the
  /// match, a frame that fails to tokenize skips its round.
  std::vector<std::string> add_match(const MatchRecord& match);

  std::size_t staged_states() const noexcept;

  StateStore finish() &&;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Builds a store from a set of matches in one step.
StateStore index_states(MeshCatalog meshes, std::span<const MatchRecord> matches,
                        std::vector<std::string>* diagnostics = nullptr);

}  // namespace statedex
