#include "statedex/navmesh.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include "statedex/error.hpp"

namespace statedex {

using nlohmann::json;

double Rect::squared_distance(double x, double y) const {
  const double dx = x < x_min ? x_min - x : (x > x_max ? x - x_max : 0.0);
  const double dy = y < y_min ? y_min - y : (y > y_max ? y - y_max : 0.0);
  return dx * dx + dy * dy;
}

NavMesh::NavMesh(std::string map_name, std::vector<Place> places, std::vector<NavArea> areas,
                 std::vector<std::pair<AreaId, AreaId>> edges)
    : map_name_(std::move(map_name)),
      places_(std::move(places)),
      areas_(std::move(areas)),
      edges_(std::move(edges)) {
  if (map_name_.empty()) throw MeshError("mesh has no map_name");
  if (places_.empty()) throw MeshError("mesh '" + map_name_ + "' has no places");

  std::set<std::string> names;
  for (std::size_t i = 0; i < places_.size(); ++i) {
    if (places_[i].place_id != static_cast<PlaceId>(i))
      throw MeshError("place '" + places_[i].name + "' has non-sequential place_id");
    if (!names.insert(places_[i].name).second)
      throw MeshError("duplicate place name '" + places_[i].name + "'");
  }

  std::vector<PlaceId> order(places_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](PlaceId a, PlaceId b) { return places_[a].name < places_[b].name; });
  by_token_position_ = order;
  for (std::size_t pos = 0; pos < order.size(); ++pos)
    places_[static_cast<std::size_t>(order[pos])].token_position = static_cast<std::uint32_t>(pos);

  std::set<AreaId> ids;
  for (const auto& a : areas_) {
    if (!ids.insert(a.area_id).second)
      throw MeshError("duplicate area id " + std::to_string(a.area_id));
    if (!(a.bounds.x_min < a.bounds.x_max) || !(a.bounds.y_min < a.bounds.y_max))
      throw MeshError("area " + std::to_string(a.area_id) + " has degenerate bounds");
    if (a.place_id < 0 || static_cast<std::size_t>(a.place_id) >= places_.size())
      throw MeshError("area " + std::to_string(a.area_id) + ": unknown place reference");
  }
  for (const auto& [a, b] : edges_) {
    if (!ids.count(a) || !ids.count(b))
      throw MeshError("edge (" + std::to_string(a) + ", " + std::to_string(b) +
                      ") references an unknown area");
  }

  // Keep areas sorted by id so locate's lowest-id tie-break is a first-wins scan.
  std::sort(areas_.begin(), areas_.end(),
            [](const NavArea& a, const NavArea& b) { return a.area_id < b.area_id; });

  if (!areas_.empty()) {
    extent_ = areas_.front().bounds;
    for (const auto& a : areas_) {
      extent_.x_min = std::min(extent_.x_min, a.bounds.x_min);
      extent_.y_min = std::min(extent_.y_min, a.bounds.y_min);
      extent_.x_max = std::max(extent_.x_max, a.bounds.x_max);
      extent_.y_max = std::max(extent_.y_max, a.bounds.y_max);
    }
  }
}

namespace {

template <typename T>
T require(const json& obj, const char* key, const std::string& context) {
  auto it = obj.find(key);
  if (it == obj.end()) throw MeshError(context + ": missing field '" + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw MeshError(context + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace

NavMesh NavMesh::from_json(const json& doc) {
  if (!doc.is_object()) throw MeshError("mesh document is not an object");
  auto map_name = require<std::string>(doc, "map_name", "mesh");
  const std::string ctx = "mesh '" + map_name + "'";

  const auto& places_doc = doc.contains("places") ? doc["places"] : json();
  if (!places_doc.is_array()) throw MeshError(ctx + ": 'places' must be an array");
  std::vector<Place> places;
  std::unordered_map<std::string, PlaceId> by_name;
  for (const auto& p : places_doc) {
    if (!p.is_object()) throw MeshError(ctx + ": place entry is not an object");
    auto name = require<std::string>(p, "name", ctx + " place");
    const auto id = static_cast<PlaceId>(places.size());
    if (!by_name.emplace(name, id).second) throw MeshError("duplicate place name '" + name + "'");
    places.push_back(Place{id, std::move(name), 0});
  }

  const auto& areas_doc = doc.contains("areas") ? doc["areas"] : json();
  if (!areas_doc.is_array()) throw MeshError(ctx + ": 'areas' must be an array");
  std::vector<NavArea> areas;
  for (const auto& a : areas_doc) {
    if (!a.is_object()) throw MeshError(ctx + ": area entry is not an object");
    NavArea area;
    area.area_id = require<AreaId>(a, "id", ctx + " area");
    const std::string actx = ctx + " area " + std::to_string(area.area_id);
    area.bounds.x_min = require<double>(a, "x_min", actx);
    area.bounds.y_min = require<double>(a, "y_min", actx);
    area.bounds.x_max = require<double>(a, "x_max", actx);
    area.bounds.y_max = require<double>(a, "y_max", actx);
    area.z_center = require<double>(a, "z_center", actx);
    auto place_name = require<std::string>(a, "place_name", actx);
    auto it = by_name.find(place_name);
    if (it == by_name.end())
      throw MeshError("area " + std::to_string(area.area_id) + ": unknown place reference '" +
                      place_name + "'");
    area.place_id = it->second;
    areas.push_back(area);
  }

  std::vector<std::pair<AreaId, AreaId>> edges;
  if (doc.contains("edges")) {
    const auto& edges_doc = doc["edges"];
    if (!edges_doc.is_array()) throw MeshError(ctx + ": 'edges' must be an array");
    for (const auto& e : edges_doc) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
          !e[1].is_number_integer())
        throw MeshError(ctx + ": edge must be a pair of area ids");
      edges.emplace_back(e[0].get<AreaId>(), e[1].get<AreaId>());
    }
  }
  return NavMesh(std::move(map_name), std::move(places), std::move(areas), std::move(edges));
}

NavMesh NavMesh::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw MeshError(path.string() + ": " + e.what());
  }
  return from_json(doc);
}

json NavMesh::to_json() const {
  json places = json::array();
  for (const auto& p : places_) places.push_back({{"name", p.name}});
  json areas = json::array();
  for (const auto& a : areas_) {
    areas.push_back({{"id", a.area_id},
                     {"x_min", a.bounds.x_min},
                     {"y_min", a.bounds.y_min},
                     {"x_max", a.bounds.x_max},
                     {"y_max", a.bounds.y_max},
                     {"z_center", a.z_center},
                     {"place_name", places_[static_cast<std::size_t>(a.place_id)].name}});
  }
  json edges = json::array();
  for (const auto& [a, b] : edges_) edges.push_back({a, b});
  return {{"map_name", map_name_}, {"places", places}, {"areas", areas}, {"edges", edges}};
}

const Place& NavMesh::place_at(std::uint32_t pos) const {
  return places_.at(static_cast<std::size_t>(by_token_position_.at(pos)));
}

PlaceId NavMesh::find_place(std::string_view name) const {
  for (const auto& p : places_)
    if (p.name == name) return p.place_id;
  return -1;
}

const NavArea& NavMesh::area(AreaId id) const {
  auto it = std::lower_bound(areas_.begin(), areas_.end(), id,
                             [](const NavArea& a, AreaId v) { return a.area_id < v; });
  if (it == areas_.end() || it->area_id != id)
    throw MeshError("unknown area id " + std::to_string(id));
  return *it;
}

Location NavMesh::locate(const Vec3& point) const {
  if (areas_.empty()) throw MeshError("empty mesh");

  const NavArea* best = nullptr;
  double best_dz = std::numeric_limits<double>::infinity();
  for (const auto& a : areas_) {
    if (!a.bounds.contains(point.x, point.y)) continue;
    const double dz = std::abs(a.z_center - point.z);
    if (dz < best_dz) {
      best = &a;
      best_dz = dz;
    }
  }
  if (best) return {best->area_id, best->place_id};

  double best_d2 = std::numeric_limits<double>::infinity();
  for (const auto& a : areas_) {
    const double d2 = a.bounds.squared_distance(point.x, point.y);
    const double dz = std::abs(a.z_center - point.z);
    if (d2 < best_d2 || (d2 == best_d2 && dz < best_dz)) {
      best = &a;
      best_d2 = d2;
      best_dz = dz;
    }
  }
  return {best->area_id, best->place_id};
}

std::vector<std::vector<PlaceId>> NavMesh::place_adjacency() const {
  std::vector<std::set<PlaceId>> sets(places_.size());
  for (const auto& [a, b] : edges_) {
    const PlaceId pa = area(a).place_id;
    const PlaceId pb = area(b).place_id;
    if (pa == pb) continue;
    sets[static_cast<std::size_t>(pa)].insert(pb);
    sets[static_cast<std::size_t>(pb)].insert(pa);
  }
  std::vector<std::vector<PlaceId>> out;
  out.reserve(sets.size());
  for (auto& s : sets) out.emplace_back(s.begin(), s.end());
  return out;
}

MeshCatalog load_mesh_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw MeshError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  MeshCatalog catalog;
  for (const auto& f : files) {
    NavMesh mesh = NavMesh::load(f);
    std::string name = mesh.map_name();
    if (!catalog.emplace(name, std::move(mesh)).second)
      throw MeshError("two mesh files declare map '" + name + "'");
  }
  return catalog;
}

}  // namespace statedex
