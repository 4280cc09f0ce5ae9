#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "statedex/store.hpp"

namespace statedex {

/// Contextual constraints. Every unset field matches everything.
struct FilterSpec {
  std::optional<std::string> team;
  /// Restricts `team` to one side of the round.
  std::optional<Side> team_side;
  std::optional<std::vector<BuyType>> ct_buy;
  std::optional<std::vector<BuyType>> t_buy;
  /// Minimum grenades held by the side's alive players at the state.
  std::optional<int> min_grenades_ct;
  std::optional<int> min_grenades_t;
  std::optional<std::vector<EndReason>> end_reasons;
  std::optional<bool> bomb_planted;
  /// Inclusive ISO-8601 date bounds on the match date.
  std::optional<std::string> date_from;
  std::optional<std::string> date_to;

  bool empty() const;
};

enum class QueryMode : std::uint8_t { full, partial };

struct SketchPoint {
  Side side = Side::T;
  Vec3 position;
};

struct QuerySpec {
  std::string map;
  std::vector<SketchPoint> sketch;
  QueryMode mode = QueryMode::full;
  FilterSpec filters;
  std::optional<int> k_nearest;
};

struct QueryOptions {
  /// Result sets larger than this are returned in chronological order
  /// instead of being ranked by closest-player distance.
  std::size_t rank_cap = 10000;
};

struct QueryHit {
  StateIndex state = 0;
  /// Closest-player distance from the sketch into the state; absent when
  /// the result set exceeded the rank cap or a sketched side is empty in
  /// the state.
  std::optional<double> distance;
  /// Token distance to the query token (nearest lookups only).
  std::optional<std::uint32_t> hamming;
};

/// The sketch as a state in which every drawn player is alive.
GameState sketch_state(const QuerySpec& query);

/// T(q) for the sketch.
Token query_token(const NavMesh& mesh, const QuerySpec& query);

/// Throws QueryError("impossible_sketch") if a full-mode sketch draws more
/// than five players on a side, QueryError("empty_sketch") for an empty
/// partial sketch, and QueryError("invalid_query") for k_nearest in
/// partial mode or k < 1.
void validate_query(const QuerySpec& query);

bool filter_matches(const StateStore& store, const FilterSpec& filter, StateIndex state);

/// States whose token equals T(q) and that pass the filters, ranked by
/// distance from the sketch then chronologically.
std::vector<QueryHit> lookup_exact(const StateStore& store, const QuerySpec& query,
                                   const QueryOptions& options = {});

/// States holding at least the sketched number of players of each side in
/// each sketched place.
std::vector<QueryHit> lookup_partial(const StateStore& store, const QuerySpec& query,
                                     const QueryOptions& options = {});

/// Up to k filtered states with the smallest token distance to T(q); ties
/// broken by sketch distance, then chronologically.
std::vector<QueryHit> lookup_nearest(const StateStore& store, const QuerySpec& query,
                                     const QueryOptions& options = {});

/// Dispatches on mode and k_nearest after validate_query().
std::vector<QueryHit> run_query(const StateStore& store, const QuerySpec& query,
                                const QueryOptions& options = {});

}  // namespace statedex
