#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <tuple>

namespace oracle {

using namespace statedex;

Mesh mesh_from_json(const nlohmann::json& doc) {
  Mesh m;
  m.map = doc.at("map_name").get<std::string>();
  for (const auto& p : doc.at("places")) m.sorted_places.push_back(p.at("name").get<std::string>());
  std::sort(m.sorted_places.begin(), m.sorted_places.end());
  for (const auto& a : doc.at("areas"))
    m.areas.push_back({a.at("id").get<long long>(), a.at("x_min").get<double>(), a.at("y_min").get<double>(),
                       a.at("x_max").get<double>(), a.at("y_max").get<double>(), a.at("z_center").get<double>(),
                       a.at("place_name").get<std::string>()});
  return m;
}

Mesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  return mesh_from_json(nlohmann::json::parse(in));
}

std::string locate_place(const Mesh& mesh, const Vec3& p) {
  // (outside, squared planar gap, |dz|, id); the smallest tuple wins.
  using Key = std::tuple<int, double, double, long long>;
  Key best{2, 0, 0, 0};
  const Area* winner = nullptr;
  for (const auto& a : mesh.areas) {
    const bool inside = p.x >= a.x0 && p.x <= a.x1 && p.y >= a.y0 && p.y <= a.y1;
    double gap = 0;
    if (!inside) {
      const double dx = p.x < a.x0 ? a.x0 - p.x : p.x > a.x1 ? p.x - a.x1 : 0;
      const double dy = p.y < a.y0 ? a.y0 - p.y : p.y > a.y1 ? p.y - a.y1 : 0;
      gap = dx * dx + dy * dy;
    }
    Key k{inside ? 0 : 1, gap, std::abs(p.z - a.z), a.id};
    if (!winner || k < best) {
      best = k;
      winner = &a;
    }
  }
  return winner->place;
}

Tally tally(const Mesh& mesh, const GameState& state) {
  Tally t;
  t[0].assign(mesh.sorted_places.size(), 0);
  t[1].assign(mesh.sorted_places.size(), 0);
  for (const auto& p : state.players) {
    if (!p.alive) continue;
    const auto name = locate_place(mesh, p.position);
    const auto pos = std::find(mesh.sorted_places.begin(), mesh.sorted_places.end(), name) -
                     mesh.sorted_places.begin();
    ++t[p.side == Side::CT ? 1 : 0][static_cast<std::size_t>(pos)];
  }
  return t;
}

std::string render(const Tally& t) {
  std::string s;
  for (int side = 0; side < 2; ++side) {
    if (side) s += "|";
    for (std::size_t i = 0; i < t[side].size(); ++i) {
      if (i) s += " ";
      s += std::to_string(t[side][i]);
    }
  }
  return s;
}

int l1(const Tally& a, const Tally& b) {
  int d = 0;
  for (int side = 0; side < 2; ++side)
    for (std::size_t i = 0; i < a[side].size(); ++i) d += std::abs(a[side][i] - b[side][i]);
  return d;
}

double min_sum(const GameState& from, const GameState& to) {
  double total = 0;
  for (const auto& p : from.players) {
    if (!p.alive) continue;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : to.players) {
      if (!q.alive || q.side != p.side) continue;
      const double dx = p.position.x - q.position.x, dy = p.position.y - q.position.y,
                   dz = p.position.z - q.position.z;
      best = std::min(best, std::sqrt(dx * dx + dy * dy + dz * dz));
    }
    if (std::isinf(best)) return -1;
    total += best;
  }
  return total;
}

bool filter(const StateStore& store, const FilterSpec& f, StateIndex i) {
  const auto& round = store.round_of(i);
  const auto& match = store.match_of(round);
  const GameState s = store.state(i);
  const std::string& ct = store.team(round.ct_team);
  const std::string& t = store.team(round.t_team);
  if (f.team) {
    bool ok;
    if (!f.team_side)
      ok = ct == *f.team || t == *f.team;
    else if (*f.team_side == Side::CT)
      ok = ct == *f.team;
    else
      ok = t == *f.team;
    if (!ok) return false;
  }
  auto in = [](const auto& set, auto v) {
    if (!set) return true;
    for (auto x : *set)
      if (x == v) return true;
    return false;
  };
  if (!in(f.ct_buy, round.ct_buy) || !in(f.t_buy, round.t_buy) || !in(f.end_reasons, round.end_reason))
    return false;
  if (f.bomb_planted && s.bomb_planted != *f.bomb_planted) return false;
  int gct = 0, gt = 0;
  for (const auto& p : s.players)
    if (p.alive) (p.side == Side::CT ? gct : gt) += p.grenade_count;
  if (f.min_grenades_ct && gct < *f.min_grenades_ct) return false;
  if (f.min_grenades_t && gt < *f.min_grenades_t) return false;
  const std::string day = match.date.substr(0, 10);
  if (f.date_from && day < f.date_from->substr(0, 10)) return false;
  if (f.date_to && day > f.date_to->substr(0, 10)) return false;
  return true;
}

std::vector<Tally> tally_corpus(const Mesh& mesh, const StateStore& store, std::uint32_t map_index) {
  std::vector<Tally> out(store.state_count());
  for (StateIndex i = 0; i < store.state_count(); ++i)
    if (store.match_of(store.round_of(i)).map == map_index) out[i] = tally(mesh, store.state(i));
  return out;
}

namespace {
bool on_map(const StateStore& store, StateIndex i, std::uint32_t map_index) {
  return store.match_of(store.round_of(i)).map == map_index;
}
}  // namespace

std::vector<StateIndex> exact(const StateStore& store, const std::vector<Tally>& tallies,
                              std::uint32_t map_index, const Tally& target, const FilterSpec& f) {
  std::vector<StateIndex> out;
  for (StateIndex i = 0; i < store.state_count(); ++i)
    if (on_map(store, i, map_index) && tallies[i] == target && filter(store, f, i)) out.push_back(i);
  return out;
}

std::vector<StateIndex> partial(const StateStore& store, const std::vector<Tally>& tallies,
                                std::uint32_t map_index, const Tally& sketched, const FilterSpec& f) {
  std::vector<StateIndex> out;
  for (StateIndex i = 0; i < store.state_count(); ++i) {
    if (!on_map(store, i, map_index)) continue;
    bool ok = true;
    for (int side = 0; side < 2 && ok; ++side)
      for (std::size_t k = 0; k < sketched[side].size(); ++k)
        if (sketched[side][k] > 0 && tallies[i][side][k] < sketched[side][k]) ok = false;
    if (ok && filter(store, f, i)) out.push_back(i);
  }
  return out;
}

std::vector<int> nearest_distances(const StateStore& store, const std::vector<Tally>& tallies,
                                   std::uint32_t map_index, const Tally& target, const FilterSpec& f,
                                   std::size_t k) {
  std::vector<int> d;
  for (StateIndex i = 0; i < store.state_count(); ++i)
    if (on_map(store, i, map_index) && filter(store, f, i)) d.push_back(l1(tallies[i], target));
  std::sort(d.begin(), d.end());
  if (d.size() > k) d.resize(k);
  return d;
}

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  double wins = 0;
  double pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      pairs += 1;
      wins += scores[i] > scores[j] ? 1.0 : scores[i] == scores[j] ? 0.5 : 0.0;
    }
  }
  return wins / pairs;
}

}  // namespace oracle
