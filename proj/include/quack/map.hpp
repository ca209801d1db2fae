#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace quack {

// Index of a room inside a Map. Rooms are indexed in lexicographic order of
// their normalized names, so ordering by index is ordering by RoomId.
enum class RoomIndex : std::uint16_t {};

constexpr std::size_t idx(RoomIndex r) { return static_cast<std::size_t>(r); }

struct Neighbor {
  RoomIndex room;
  int weight;
  bool operator==(const Neighbor&) const = default;
};

struct Corridor {
  RoomIndex a;  // a < b
  RoomIndex b;
  int weight;
};

struct TravelPlan {
  std::vector<RoomIndex> path;
  int cost = 0;
};

struct LayoutPoint {
  double x = 0;
  double y = 0;
};

// Lowercases, trims, and turns runs of whitespace/hyphens into one underscore.
// "Med Bay" -> "med_bay", "Upper-Engine" -> "upper_engine".
std::string normalize_room_name(std::string_view raw);

// Immutable weighted room graph. Construct with Map::load.
class Map {
 public:
  // Parses a map-config document (JSON). Throws ConfigError naming the
  // offending element on any invariant violation.
  static Map load(std::string_view document);
  static Map load_file(const std::string& path);

  std::size_t room_count() const { return names_.size(); }
  const std::string& name(RoomIndex r) const { return names_.at(idx(r)); }
  const std::vector<std::string>& names() const { return names_; }

  // Resolves a room mention. Accepts the canonical name, case/spacing
  // variants, and underscore-less spellings ("med bay", "medbay" and
  // "Med-Bay" all resolve to medbay).
  std::optional<RoomIndex> find(std::string_view mention) const;
  RoomIndex at(std::string_view mention) const;  // throws ConfigError

  // Neighbors sorted by RoomId.
  std::span<const Neighbor> adjacent(RoomIndex r) const { return adjacency_.at(idx(r)); }
  std::optional<int> weight(RoomIndex a, RoomIndex b) const;

  // Minimum-cost path; ties broken by lexicographically smallest room sequence.
  TravelPlan shortest_travel(RoomIndex from, RoomIndex to) const;
  int distance(RoomIndex from, RoomIndex to) const { return dist_[idx(from)][idx(to)]; }

  const std::vector<Corridor>& corridors() const { return corridors_; }
  const std::vector<RoomIndex>& task_rooms() const { return task_rooms_; }
  bool is_task_room(RoomIndex r) const;
  RoomIndex emergency_room() const { return emergency_; }

  // Rooms in the order the config listed them (used for prompts).
  const std::vector<RoomIndex>& listing_order() const { return listing_order_; }
  std::optional<LayoutPoint> layout(RoomIndex r) const;
  bool has_layout() const { return !layout_.empty(); }

  const std::string& id() const { return id_; }
  // FNV-1a of the canonical document; identifies the map inside game logs.
  const std::string& hash() const { return hash_; }
  // Canonical form of the map; load(to_json().dump()) reproduces the map.
  nlohmann::json to_json() const;

 private:
  Map() = default;

  std::string id_;
  std::string hash_;
  std::vector<std::string> names_;
  std::vector<RoomIndex> listing_order_;
  std::vector<std::vector<Neighbor>> adjacency_;
  std::vector<Corridor> corridors_;
  std::vector<RoomIndex> task_rooms_;
  RoomIndex emergency_{};
  std::vector<LayoutPoint> layout_;
  std::vector<std::vector<int>> dist_;
};

// The bundled 10-room, 14-corridor map.
const Map& default_map();

}  // namespace quack
