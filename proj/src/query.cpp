#include "statedex/query.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "statedex/error.hpp"

namespace statedex {

namespace {

template <typename T>
bool contains(const std::optional<std::vector<T>>& set, T value) {
  return !set || std::find(set->begin(), set->end(), value) != set->end();
}

bool round_matches(const StateStore& store, const FilterSpec& f, const RoundMeta& r) {
  if (f.team) {
    const bool ct = store.team(r.ct_team) == *f.team;
    const bool t = store.team(r.t_team) == *f.team;
    if (f.team_side == Side::CT ? !ct : f.team_side == Side::T ? !t : !(ct || t)) return false;
  }
  if (!contains(f.ct_buy, r.ct_buy) || !contains(f.t_buy, r.t_buy)) return false;
  if (!contains(f.end_reasons, r.end_reason)) return false;
  if (f.date_from || f.date_to) {
    const auto& date = store.match_of(r).date;
    if (f.date_from && date.compare(0, f.date_from->size(), *f.date_from) < 0) return false;
    if (f.date_to && date.compare(0, f.date_to->size(), *f.date_to) > 0) return false;
  }
  return true;
}

bool state_matches(const StateStore& store, const FilterSpec& f, StateIndex i) {
  if (f.bomb_planted && store.row(i).bomb_planted != *f.bomb_planted) return false;
  if (f.min_grenades_ct || f.min_grenades_t) {
    std::array<int, 2> grenades{0, 0};
    for (const auto& p : store.players(i))
      if (p.alive()) grenades[static_cast<int>(p.side)] += p.grenade_count;
    if (f.min_grenades_t && grenades[0] < *f.min_grenades_t) return false;
    if (f.min_grenades_ct && grenades[1] < *f.min_grenades_ct) return false;
  }
  return true;
}

// Applies the filter to an ascending candidate list, evaluating the
// round-level part once per round.
template <typename Range, typename Emit>
void filter_candidates(const StateStore& store, const FilterSpec& f, const Range& candidates,
                       Emit&& emit) {
  if (f.empty()) {
    for (StateIndex i : candidates) emit(i);
    return;
  }
  std::uint32_t cached_round = std::numeric_limits<std::uint32_t>::max();
  bool cached = false;
  for (StateIndex i : candidates) {
    const std::uint32_t r = store.row(i).round;
    if (r != cached_round) {
      cached_round = r;
      cached = round_matches(store, f, store.data().rounds[r]);
    }
    if (cached && state_matches(store, f, i)) emit(i);
  }
}

// Closest-player distance from the sketch into a stored state, the same
// quantity as state_distance(sketch_state(q), state(i)) without
// materializing the state.
std::optional<double> sketch_distance(const StateStore& store, const QuerySpec& q, StateIndex i) {
  const auto players = store.players(i);
  double total = 0.0;
  for (const auto& s : q.sketch) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : players)
      if (p.alive() && p.side == s.side) best = std::min(best, distance(s.position, p.position));
    if (std::isinf(best)) return std::nullopt;
    total += best;
  }
  return total;
}

// Sorts hits by (hamming, distance, state) when the set is small enough to
// rank; otherwise by (hamming, state).
void rank(const StateStore& store, const QuerySpec& q, std::vector<QueryHit>& hits,
          const QueryOptions& options) {
  if (hits.size() <= options.rank_cap) {
    for (auto& h : hits) h.distance = sketch_distance(store, q, h.state);
    static constexpr double inf = std::numeric_limits<double>::infinity();
    std::sort(hits.begin(), hits.end(), [](const QueryHit& a, const QueryHit& b) {
      const auto ha = a.hamming.value_or(0), hb = b.hamming.value_or(0);
      if (ha != hb) return ha < hb;
      const double da = a.distance.value_or(inf), db = b.distance.value_or(inf);
      if (da != db) return da < db;
      return a.state < b.state;
    });
  } else {
    std::sort(hits.begin(), hits.end(), [](const QueryHit& a, const QueryHit& b) {
      const auto ha = a.hamming.value_or(0), hb = b.hamming.value_or(0);
      if (ha != hb) return ha < hb;
      return a.state < b.state;
    });
  }
}

std::uint32_t map_of(const StateStore& store, const QuerySpec& q) {
  auto idx = store.map_index(q.map);
  if (!idx) throw UnknownMapError(q.map);
  return *idx;
}

}  // namespace

bool FilterSpec::empty() const {
  return !team && !ct_buy && !t_buy && !min_grenades_ct && !min_grenades_t && !end_reasons &&
         !bomb_planted && !date_from && !date_to;
}

GameState sketch_state(const QuerySpec& query) {
  GameState s;
  s.map = query.map;
  int n = 0;
  for (const auto& p : query.sketch) {
    PlayerSnapshot ps;
    ps.player_id = "sketch#" + std::to_string(++n);
    ps.side = p.side;
    ps.position = p.position;
    s.players.push_back(std::move(ps));
  }
  return s;
}

Token query_token(const NavMesh& mesh, const QuerySpec& query) {
  return tokenize_state(mesh, sketch_state(query));
}

void validate_query(const QuerySpec& q) {
  if (q.mode == QueryMode::full) {
    std::array<int, 2> per_side{0, 0};
    for (const auto& p : q.sketch) ++per_side[static_cast<int>(p.side)];
    if (per_side[0] > 5 || per_side[1] > 5)
      throw QueryError("impossible_sketch", "full-mode sketch draws more than 5 players on a side");
  } else {
    if (q.sketch.empty()) throw QueryError("empty_sketch", "partial query with an empty sketch");
    if (q.k_nearest) throw QueryError("invalid_query", "k_nearest requires full mode");
  }
  if (q.k_nearest && *q.k_nearest < 1) throw QueryError("invalid_query", "k_nearest must be >= 1");
}

bool filter_matches(const StateStore& store, const FilterSpec& filter, StateIndex state) {
  return round_matches(store, filter, store.round_of(state)) &&
         state_matches(store, filter, state);
}

std::vector<QueryHit> lookup_exact(const StateStore& store, const QuerySpec& q,
                                   const QueryOptions& options) {
  const NavMesh& mesh = store.mesh(map_of(store, q));
  const auto candidates = store.lookup(q.map, query_token(mesh, q).render());
  std::vector<QueryHit> hits;
  filter_candidates(store, q.filters, candidates,
                    [&](StateIndex i) { hits.push_back(QueryHit{i, std::nullopt, 0u}); });
  rank(store, q, hits, options);
  return hits;
}

std::vector<QueryHit> lookup_partial(const StateStore& store, const QuerySpec& q,
                                     const QueryOptions& options) {
  if (q.sketch.empty()) throw QueryError("empty_sketch", "partial query with an empty sketch");
  const std::uint32_t map = map_of(store, q);
  const NavMesh& mesh = store.mesh(map);
  const Token sketched = query_token(mesh, q);
  const std::size_t n = mesh.place_count();

  // Only the sketched (side, place) cells constrain the match.
  std::vector<std::pair<std::size_t, std::uint16_t>> required;
  for (std::size_t k = 0; k < n; ++k) {
    if (sketched.t_side.counts[k]) required.emplace_back(k, sketched.t_side.counts[k]);
    if (sketched.ct_side.counts[k]) required.emplace_back(n + k, sketched.ct_side.counts[k]);
  }

  std::vector<StateIndex> candidates;
  for (TokenId id : store.tokens_of_map(map)) {
    const auto& counts = store.token_row(id).counts;
    bool ok = true;
    for (const auto& [cell, c] : required)
      if (counts[cell] < c) {
        ok = false;
        break;
      }
    if (!ok) continue;
    const auto post = store.postings(id);
    candidates.insert(candidates.end(), post.begin(), post.end());
  }
  std::sort(candidates.begin(), candidates.end());

  std::vector<QueryHit> hits;
  filter_candidates(store, q.filters, candidates,
                    [&](StateIndex i) { hits.push_back(QueryHit{i, std::nullopt, std::nullopt}); });
  rank(store, q, hits, options);
  return hits;
}

std::vector<QueryHit> lookup_nearest(const StateStore& store, const QuerySpec& q,
                                     const QueryOptions& options) {
  if (!q.k_nearest || *q.k_nearest < 1)
    throw QueryError("invalid_query", "nearest lookup needs k_nearest >= 1");
  const auto k = static_cast<std::size_t>(*q.k_nearest);
  const std::uint32_t map = map_of(store, q);
  const NavMesh& mesh = store.mesh(map);
  const Token target = query_token(mesh, q);
  std::vector<std::uint16_t> flat = target.t_side.counts;
  flat.insert(flat.end(), target.ct_side.counts.begin(), target.ct_side.counts.end());

  std::vector<std::pair<std::uint32_t, TokenId>> by_distance;
  const auto tokens = store.tokens_of_map(map);
  by_distance.reserve(tokens.size());
  for (TokenId id : tokens) {
    const auto& counts = store.token_row(id).counts;
    std::uint32_t d = 0;
    for (std::size_t c = 0; c < flat.size(); ++c)
      d += static_cast<std::uint32_t>(std::abs(int(counts[c]) - int(flat[c])));
    by_distance.emplace_back(d, id);
  }
  std::sort(by_distance.begin(), by_distance.end());

  // Walk distance groups outward until k filtered states are collected; the
  // whole last group is kept so its internal ties rank correctly.
  std::vector<QueryHit> hits;
  std::vector<StateIndex> group;
  for (std::size_t g = 0; g < by_distance.size() && hits.size() < k;) {
    const std::uint32_t d = by_distance[g].first;
    group.clear();
    for (; g < by_distance.size() && by_distance[g].first == d; ++g) {
      const auto post = store.postings(by_distance[g].second);
      group.insert(group.end(), post.begin(), post.end());
    }
    std::sort(group.begin(), group.end());
    filter_candidates(store, q.filters, group,
                      [&](StateIndex i) { hits.push_back(QueryHit{i, std::nullopt, d}); });
  }
  rank(store, q, hits, options);
  if (hits.size() > k) hits.resize(k);
  return hits;
}

std::vector<QueryHit> run_query(const StateStore& store, const QuerySpec& query,
                                const QueryOptions& options) {
  validate_query(query);
  if (query.mode == QueryMode::partial) return lookup_partial(store, query, options);
  if (query.k_nearest) return lookup_nearest(store, query, options);
  return lookup_exact(store, query, options);
}

}  // namespace statedex
