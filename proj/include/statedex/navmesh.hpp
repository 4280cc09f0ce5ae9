#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "statedex/types.hpp"

namespace statedex {

using AreaId = std::int64_t;
using PlaceId = std::int32_t;

struct Rect {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  bool contains(double x, double y) const {
    return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
  }

  /// Squared planar distance from (x, y) to the closest point of the rectangle.
  double squared_distance(double x, double y) const;
};

struct NavArea {
  AreaId area_id = 0;
  Rect bounds;
  double z_center = 0.0;
  PlaceId place_id = 0;
};

struct Place {
  PlaceId place_id = 0;
  std::string name;
  std::uint32_t token_position = 0;
};

struct Location {
  AreaId area_id = 0;
  PlaceId place_id = 0;

  friend bool operator==(const Location&, const Location&) = default;
};

/// Discretized map: areas grouped into named places. Immutable once loaded.
///
/// Places are identified by their position in the source document
/// (`place_id`) and ordered for tokenization by a case-sensitive
/// lexicographic sort of their names (`token_position`).
class NavMesh {
 public:
  /// Validates and takes ownership of the parts. Throws MeshError.
  NavMesh(std::string map_name, std::vector<Place> places, std::vector<NavArea> areas,
          std::vector<std::pair<AreaId, AreaId>> edges);

  static NavMesh from_json(const nlohmann::json& doc);
  static NavMesh load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  const std::string& map_name() const noexcept { return map_name_; }
  const std::vector<Place>& places() const noexcept { return places_; }
  const std::vector<NavArea>& areas() const noexcept { return areas_; }
  const std::vector<std::pair<AreaId, AreaId>>& edges() const noexcept { return edges_; }

  std::size_t place_count() const noexcept { return places_.size(); }
  const Place& place(PlaceId id) const { return places_.at(static_cast<std::size_t>(id)); }
  /// Place at token position `pos`.
  const Place& place_at(std::uint32_t pos) const;
  /// Returns -1 if no place carries `name`.
  PlaceId find_place(std::string_view name) const;
  const NavArea& area(AreaId id) const;

  /// Maps a point to the area containing it. Overlapping candidates are
  /// resolved by closest z_center, then lowest area id. Points outside
  /// every area snap to the nearest rectangle in the plane (ties broken by
  /// z proximity, then lowest area id).
  Location locate(const Vec3& point) const;

  /// Token position of the place containing `point`.
  std::uint32_t token_position(const Vec3& point) const {
    return places_[static_cast<std::size_t>(locate(point).place_id)].token_position;
  }

  /// Bounding box over all areas.
  Rect extent() const noexcept { return extent_; }

  /// Place adjacency derived from area edges; self-loops excluded.
  std::vector<std::vector<PlaceId>> place_adjacency() const;

 private:
  std::string map_name_;
  std::vector<Place> places_;
  std::vector<NavArea> areas_;
  std::vector<std::pair<AreaId, AreaId>> edges_;
  std::vector<PlaceId> by_token_position_;
  Rect extent_;
};

/// Meshes keyed by map name.
using MeshCatalog = std::map<std::string, NavMesh, std::less<>>;

/// Loads every *.json file in `dir` as a mesh. Throws MeshError on the
/// first invalid file or on two files declaring the same map.
MeshCatalog load_mesh_dir(const std::filesystem::path& dir);

}  // namespace statedex
