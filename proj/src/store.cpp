#include "statedex/store.hpp"

#include <algorithm>
#include <limits>
#include <unordered_set>

#include "statedex/error.hpp"

namespace statedex {

namespace {

[[noreturn]] void corrupt(const std::string& what) { throw Error("corrupt_store", what); }

Token token_from_counts(const std::vector<std::uint16_t>& counts) {
  const std::size_t n = counts.size() / 2;
  Token token;
  token.t_side.counts.assign(counts.begin(), counts.begin() + static_cast<std::ptrdiff_t>(n));
  token.ct_side.counts.assign(counts.begin() + static_cast<std::ptrdiff_t>(n), counts.end());
  return token;
}

}  // namespace

// ---------------------------------------------------------------- StateStore

StateStore::StateStore(StoreData data) : data_(std::move(data)) {
  const auto& d = data_;
  for (std::size_t i = 1; i < d.meshes.size(); ++i)
    if (!(d.meshes[i - 1].map_name() < d.meshes[i].map_name())) corrupt("meshes not sorted/unique");
  for (std::size_t i = 1; i < d.teams.size(); ++i)
    if (!(d.teams[i - 1] < d.teams[i])) corrupt("teams not sorted/unique");

  std::uint32_t expected_round = 0;
  for (std::size_t m = 0; m < d.matches.size(); ++m) {
    const auto& match = d.matches[m];
    if (m > 0 && !(d.matches[m - 1].match_id < match.match_id)) corrupt("matches not sorted/unique");
    if (match.map >= d.meshes.size()) corrupt("match " + match.match_id + " has bad map index");
    if (match.first_round != expected_round || match.end_round < match.first_round ||
        match.end_round > d.rounds.size())
      corrupt("match " + match.match_id + " has bad round range");
    expected_round = match.end_round;
    match_lookup_.emplace(match.match_id, static_cast<std::uint32_t>(m));
  }
  if (expected_round != d.rounds.size()) corrupt("rounds not covered by matches");

  StateIndex expected_state = 0;
  for (std::size_t r = 0; r < d.rounds.size(); ++r) {
    const auto& round = d.rounds[r];
    if (round.match >= d.matches.size() || r < d.matches[round.match].first_round ||
        r >= d.matches[round.match].end_round)
      corrupt("round " + std::to_string(r) + " has bad match index");
    if (round.ct_team >= d.teams.size() || round.t_team >= d.teams.size())
      corrupt("round " + std::to_string(r) + " has bad team index");
    if (round.first_state != expected_state || round.end_state < round.first_state ||
        round.end_state > d.states.size())
      corrupt("round " + std::to_string(r) + " has bad state range");
    expected_state = round.end_state;
  }
  if (expected_state != d.states.size()) corrupt("states not covered by rounds");

  for (const auto& tok : d.tokens) {
    if (tok.map >= d.meshes.size()) corrupt("token has bad map index");
    if (tok.counts.size() != 2 * d.meshes[tok.map].place_count())
      corrupt("token length does not match its mesh");
  }
  for (std::size_t i = 0; i < d.states.size(); ++i) {
    const auto& s = d.states[i];
    if (s.round >= d.rounds.size() || i < d.rounds[s.round].first_state ||
        i >= d.rounds[s.round].end_state)
      corrupt("state " + std::to_string(i) + " has bad round index");
    if (s.token >= d.tokens.size()) corrupt("state " + std::to_string(i) + " has bad token");
    const auto& round = d.rounds[s.round];
    if (d.tokens[s.token].map != d.matches[round.match].map)
      corrupt("state " + std::to_string(i) + " token map differs from match map");
    if (std::size_t(s.first_player) + s.player_count > d.players.size())
      corrupt("state " + std::to_string(i) + " has bad player range");
    for (std::size_t p = s.first_player; p < s.first_player + s.player_count; ++p)
      if (d.players[p].roster_slot >= round.roster.size())
        corrupt("state " + std::to_string(i) + " has bad roster slot");
    if (i > round.first_state && !(d.states[i - 1].t < s.t))
      corrupt("state " + std::to_string(i) + " breaks time order");
  }

  token_strings_.reserve(d.tokens.size());
  token_lookup_.resize(d.meshes.size());
  map_tokens_.resize(d.meshes.size());
  for (std::size_t id = 0; id < d.tokens.size(); ++id) {
    token_strings_.push_back(token_from_counts(d.tokens[id].counts).render());
    if (!token_lookup_[d.tokens[id].map].emplace(token_strings_.back(), TokenId(id)).second)
      corrupt("duplicate token row " + token_strings_.back());
    map_tokens_[d.tokens[id].map].push_back(TokenId(id));
  }

  posting_offsets_.assign(d.tokens.size() + 1, 0);
  for (const auto& s : d.states) ++posting_offsets_[s.token + 1];
  for (std::size_t i = 1; i < posting_offsets_.size(); ++i)
    posting_offsets_[i] += posting_offsets_[i - 1];
  posting_states_.resize(d.states.size());
  std::vector<std::uint32_t> fill(posting_offsets_.begin(), posting_offsets_.end() - 1);
  for (std::size_t i = 0; i < d.states.size(); ++i)
    posting_states_[fill[d.states[i].token]++] = static_cast<StateIndex>(i);
}

std::optional<std::uint32_t> StateStore::map_index(std::string_view map) const {
  auto it = std::lower_bound(data_.meshes.begin(), data_.meshes.end(), map,
                             [](const NavMesh& m, std::string_view v) { return m.map_name() < v; });
  if (it == data_.meshes.end() || it->map_name() != map) return std::nullopt;
  return static_cast<std::uint32_t>(it - data_.meshes.begin());
}

const NavMesh& StateStore::mesh(std::string_view map) const {
  auto idx = map_index(map);
  if (!idx) throw UnknownMapError(std::string(map));
  return data_.meshes[*idx];
}

std::span<const StoredPlayer> StateStore::players(StateIndex i) const {
  const auto& s = data_.states[i];
  return {data_.players.data() + s.first_player, s.player_count};
}

StateRef StateStore::ref(StateIndex i) const {
  const auto& r = round_of(i);
  return {data_.matches[r.match].match_id, r.round_number, data_.states[i].t};
}

GameState StateStore::state(StateIndex i) const {
  const auto& row = data_.states[i];
  const auto& r = data_.rounds[row.round];
  const auto& m = data_.matches[r.match];
  GameState s;
  s.map = data_.meshes[m.map].map_name();
  s.round_ref = {m.match_id, r.round_number};
  s.t = row.t;
  s.bomb_planted = row.bomb_planted;
  s.players.reserve(row.player_count);
  for (const auto& p : players(i)) {
    s.players.push_back(PlayerSnapshot{r.roster[p.roster_slot], p.side, p.position, p.hp, p.armor,
                                       p.equipment_value, p.grenade_count, p.alive()});
  }
  return s;
}

std::optional<StateIndex> StateStore::find_state(const StateRef& ref) const {
  auto round = find_round(ref.match_id, ref.round_number);
  if (!round) return std::nullopt;
  const auto& r = data_.rounds[*round];
  auto begin = data_.states.begin() + r.first_state;
  auto end = data_.states.begin() + r.end_state;
  auto it = std::lower_bound(begin, end, ref.t,
                             [](const StateRow& s, double t) { return s.t < t; });
  if (it == end || it->t != ref.t) return std::nullopt;
  return static_cast<StateIndex>(it - data_.states.begin());
}

Token StateStore::token_of(TokenId id) const { return token_from_counts(data_.tokens[id].counts); }

std::uint16_t StateStore::place_count(StateIndex i, Side side, std::uint32_t token_position) const {
  const auto& counts = data_.tokens[data_.states[i].token].counts;
  const std::size_t n = counts.size() / 2;
  if (token_position >= n) throw Error("bad_place", "token position out of range");
  return counts[(side == Side::T ? 0 : n) + token_position];
}

std::span<const StateIndex> StateStore::lookup(std::string_view map, std::string_view token) const {
  auto idx = map_index(map);
  if (!idx) throw UnknownMapError(std::string(map));
  const auto& table = token_lookup_[*idx];
  auto it = table.find(std::string(token));
  if (it == table.end()) return {};
  return postings(it->second);
}

std::span<const StateIndex> StateStore::postings(TokenId id) const {
  return {posting_states_.data() + posting_offsets_[id],
          posting_offsets_[id + 1] - posting_offsets_[id]};
}

std::span<const TokenId> StateStore::tokens_of_map(std::uint32_t map_index) const {
  return map_tokens_.at(map_index);
}

std::optional<std::uint32_t> StateStore::find_round(std::string_view match_id,
                                                    int round_number) const {
  auto it = match_lookup_.find(std::string(match_id));
  if (it == match_lookup_.end()) return std::nullopt;
  const auto& m = data_.matches[it->second];
  for (std::uint32_t r = m.first_round; r < m.end_round; ++r)
    if (data_.rounds[r].round_number == round_number) return r;
  return std::nullopt;
}

RoundRecord StateStore::round_record(std::uint32_t round_index) const {
  const auto& r = data_.rounds.at(round_index);
  const auto& m = data_.matches[r.match];
  RoundRecord out;
  out.match_id = m.match_id;
  out.round_number = r.round_number;
  out.winner = r.winner;
  out.end_reason = r.end_reason;
  out.ct_team = data_.teams[r.ct_team];
  out.t_team = data_.teams[r.t_team];
  out.ct_buy = r.ct_buy;
  out.t_buy = r.t_buy;
  out.score_ct = r.score_ct;
  out.score_t = r.score_t;
  out.bomb_plant_t = r.bomb_plant_t;
  out.frames.reserve(r.end_state - r.first_state);
  for (StateIndex i = r.first_state; i < r.end_state; ++i) out.frames.push_back(state(i));
  out.kills = r.kills;
  out.grenades = r.grenades;
  out.damages = r.damages;
  out.bomb_plants = r.bomb_plants;
  return out;
}

std::size_t StateStore::verify_tokens() const {
  std::size_t mismatches = 0;
  for (StateIndex i = 0; i < state_count(); ++i) {
    const auto& m = data_.matches[round_of(i).match];
    if (tokenize_state(data_.meshes[m.map], state(i)) != token(i)) ++mismatches;
  }
  return mismatches;
}

// -------------------------------------------------------------- StoreBuilder

struct StoreBuilder::Impl {
  struct PendingRound {
    RoundMeta meta;
    std::string ct_team;
    std::string t_team;
    std::vector<StateRow> rows;  // first_player relative to `players`
    std::vector<StoredPlayer> players;
  };
  struct PendingMatch {
    MatchMeta meta;
    std::vector<PendingRound> rounds;
  };

  std::vector<NavMesh> meshes;
  std::vector<std::unordered_map<std::string, TokenId>> token_ids;
  std::vector<TokenRow> tokens;
  std::vector<PendingMatch> matches;
  std::unordered_set<std::string> match_ids;
  std::size_t states = 0;
};

StoreBuilder::StoreBuilder(MeshCatalog meshes) : impl_(std::make_unique<Impl>()) {
  for (auto& [name, mesh] : meshes) impl_->meshes.push_back(std::move(mesh));
  impl_->token_ids.resize(impl_->meshes.size());
}

StoreBuilder::StoreBuilder(StoreBuilder&&) noexcept = default;
StoreBuilder& StoreBuilder::operator=(StoreBuilder&&) noexcept = default;
StoreBuilder::~StoreBuilder() = default;

std::size_t StoreBuilder::staged_states() const noexcept { return impl_->states; }

std::vector<std::string> StoreBuilder::add_match(const MatchRecord& match) {
  std::vector<std::string> diagnostics;
  auto& im = *impl_;
  auto mesh_it = std::find_if(im.meshes.begin(), im.meshes.end(),
                              [&](const NavMesh& m) { return m.map_name() == match.map; });
  if (mesh_it == im.meshes.end()) {
    diagnostics.push_back(match.match_id + ": unknown map '" + match.map + "', match skipped");
    return diagnostics;
  }
  if (!im.match_ids.insert(match.match_id).second) {
    diagnostics.push_back(match.match_id + ": duplicate match_id, match skipped");
    return diagnostics;
  }
  const auto map_idx = static_cast<std::uint32_t>(mesh_it - im.meshes.begin());
  const NavMesh& mesh = *mesh_it;

  Impl::PendingMatch pm;
  pm.meta = MatchMeta{match.match_id, match.date, match.competition_name, match.team_ct_start,
                      match.team_t_start, map_idx, 0, 0};
  for (const auto& round : match.rounds) {
    Impl::PendingRound pr;
    pr.meta.round_number = round.round_number;
    pr.meta.winner = round.winner;
    pr.meta.end_reason = round.end_reason;
    pr.meta.ct_buy = round.ct_buy;
    pr.meta.t_buy = round.t_buy;
    pr.meta.score_ct = round.score_ct;
    pr.meta.score_t = round.score_t;
    pr.meta.bomb_plant_t = round.bomb_plant_t;
    pr.meta.kills = round.kills;
    pr.meta.grenades = round.grenades;
    pr.meta.damages = round.damages;
    pr.meta.bomb_plants = round.bomb_plants;
    pr.ct_team = round.ct_team;
    pr.t_team = round.t_team;

    std::unordered_map<std::string, std::uint32_t> slots;
    std::vector<std::pair<std::string, TokenId>> new_tokens;
    try {
      for (const auto& frame : round.frames) {
        if (!pr.rows.empty() && !(pr.rows.back().t < frame.t))
          throw Error("bad_round", "frame times not strictly increasing");
        if (frame.players.size() > std::numeric_limits<std::uint8_t>::max())
          throw Error("bad_round", "too many players in one frame");
        const Token token = tokenize_state(mesh, frame);
        std::string key = token.render();
        auto& table = im.token_ids[map_idx];
        TokenId id;
        if (auto it = table.find(key); it != table.end()) {
          id = it->second;
        } else {
          id = static_cast<TokenId>(im.tokens.size());
          new_tokens.emplace_back(key, id);
          table.emplace(std::move(key), id);
          TokenRow row{map_idx, token.t_side.counts};
          row.counts.insert(row.counts.end(), token.ct_side.counts.begin(),
                            token.ct_side.counts.end());
          im.tokens.push_back(std::move(row));
        }
        StateRow row;
        row.t = frame.t;
        row.token = id;
        row.first_player = static_cast<std::uint32_t>(pr.players.size());
        row.player_count = static_cast<std::uint8_t>(frame.players.size());
        row.bomb_planted = frame.bomb_planted;
        for (const auto& p : frame.players) {
          auto [it, inserted] = slots.emplace(p.player_id, std::uint32_t(pr.meta.roster.size()));
          if (inserted) pr.meta.roster.push_back(p.player_id);
          pr.players.push_back(StoredPlayer{p.position, it->second, p.equipment_value,
                                            static_cast<std::int16_t>(p.hp),
                                            static_cast<std::int16_t>(p.armor), p.side,
                                            static_cast<std::uint8_t>(p.grenade_count)});
        }
        pr.rows.push_back(row);
      }
    } catch (const Error& e) {
      // Roll back tokens this round introduced; they are the newest rows.
      for (auto it = new_tokens.rbegin(); it != new_tokens.rend(); ++it) {
        im.token_ids[map_idx].erase(it->first);
        im.tokens.pop_back();
      }
      diagnostics.push_back(match.match_id + " round " + std::to_string(round.round_number) +
                            ": not indexed: " + e.what());
      continue;
    }
    im.states += pr.rows.size();
    pm.rounds.push_back(std::move(pr));
  }
  im.matches.push_back(std::move(pm));
  return diagnostics;
}

StateStore StoreBuilder::finish() && {
  auto& im = *impl_;
  StoreData d;
  d.meshes = std::move(im.meshes);

  std::sort(im.matches.begin(), im.matches.end(),
            [](const auto& a, const auto& b) { return a.meta.match_id < b.meta.match_id; });
  std::vector<std::string> teams;
  for (auto& m : im.matches) {
    std::stable_sort(m.rounds.begin(), m.rounds.end(), [](const auto& a, const auto& b) {
      return a.meta.round_number < b.meta.round_number;
    });
    for (const auto& r : m.rounds) {
      teams.push_back(r.ct_team);
      teams.push_back(r.t_team);
    }
  }
  std::sort(teams.begin(), teams.end());
  teams.erase(std::unique(teams.begin(), teams.end()), teams.end());
  auto team_index = [&](const std::string& name) {
    return static_cast<std::uint32_t>(std::lower_bound(teams.begin(), teams.end(), name) -
                                      teams.begin());
  };

  std::vector<TokenId> remap(im.tokens.size(), std::numeric_limits<TokenId>::max());
  d.states.reserve(im.states);
  for (auto& m : im.matches) {
    MatchMeta meta = std::move(m.meta);
    meta.first_round = static_cast<std::uint32_t>(d.rounds.size());
    const auto match_idx = static_cast<std::uint32_t>(d.matches.size());
    for (auto& r : m.rounds) {
      RoundMeta rm = std::move(r.meta);
      rm.match = match_idx;
      rm.ct_team = team_index(r.ct_team);
      rm.t_team = team_index(r.t_team);
      rm.first_state = static_cast<StateIndex>(d.states.size());
      const auto round_idx = static_cast<std::uint32_t>(d.rounds.size());
      const auto player_base = static_cast<std::uint32_t>(d.players.size());
      for (auto row : r.rows) {
        if (remap[row.token] == std::numeric_limits<TokenId>::max()) {
          remap[row.token] = static_cast<TokenId>(d.tokens.size());
          d.tokens.push_back(std::move(im.tokens[row.token]));
        }
        row.token = remap[row.token];
        row.round = round_idx;
        row.first_player += player_base;
        d.states.push_back(row);
      }
      d.players.insert(d.players.end(), r.players.begin(), r.players.end());
      rm.end_state = static_cast<StateIndex>(d.states.size());
      d.rounds.push_back(std::move(rm));
      std::vector<StateRow>().swap(r.rows);
      std::vector<StoredPlayer>().swap(r.players);
    }
    meta.end_round = static_cast<std::uint32_t>(d.rounds.size());
    d.matches.push_back(std::move(meta));
  }
  d.teams = std::move(teams);
  impl_.reset();
  return StateStore(std::move(d));
}

StateStore index_states(MeshCatalog meshes, std::span<const MatchRecord> matches,
                        std::vector<std::string>* diagnostics) {
  StoreBuilder builder(std::move(meshes));
  for (const auto& m : matches) {
    auto diag = builder.add_match(m);
    if (diagnostics) diagnostics->insert(diagnostics->end(), diag.begin(), diag.end());
  }
  return std::move(builder).finish();
}

}  // namespace statedex
