#include "quack/map.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <tuple>

#include "quack/assets.hpp"
#include "quack/error.hpp"
#include "quack/util.hpp"

namespace quack {
namespace {

using nlohmann::json;

std::string squash(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c != '_') out += c;
  }
  return out;
}

std::vector<std::string> string_list(const json& doc, const char* key) {
  if (!doc.contains(key)) throw ConfigError(std::string("map config: missing '") + key + "'");
  const auto& arr = doc.at(key);
  if (!arr.is_array()) throw ConfigError(std::string("map config: '") + key + "' must be a list");
  std::vector<std::string> out;
  for (const auto& v : arr) {
    if (!v.is_string()) throw ConfigError(std::string("map config: '") + key + "' entries must be strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

std::string normalize_room_name(std::string_view raw) {
  std::string out;
  bool pending_sep = false;
  for (char c : trim(raw)) {
    if (c == ' ' || c == '\t' || c == '-' || c == '_') {
      pending_sep = !out.empty();
      continue;
    }
    if (pending_sep) out += '_';
    pending_sep = false;
    out += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
  }
  return out;
}

Map Map::load_file(const std::string& path) { return load(read_file(path)); }

Map Map::load(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("map config: parse failure: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("map config: top level must be an object");

  Map m;
  m.id_ = doc.value("id", std::string("custom"));

  const auto raw_rooms = string_list(doc, "rooms");
  if (raw_rooms.size() < 2) throw ConfigError("map config: need at least 2 rooms");
  std::vector<std::string> listed;
  std::set<std::string> seen;
  for (const auto& r : raw_rooms) {
    auto n = normalize_room_name(r);
    if (n.empty()) throw ConfigError("map config: empty room name");
    if (!seen.insert(n).second) throw ConfigError("map config: duplicate room '" + n + "'");
    listed.push_back(n);
  }
  m.names_ = listed;
  std::sort(m.names_.begin(), m.names_.end());
  {
    std::set<std::string> squashed;
    for (const auto& n : m.names_) {
      if (!squashed.insert(squash(n)).second)
        throw ConfigError("map config: room '" + n + "' collides with another room after alias folding");
    }
  }
  for (const auto& n : listed) m.listing_order_.push_back(m.at(n));

  const auto n_rooms = m.names_.size();
  m.adjacency_.assign(n_rooms, {});
  if (!doc.contains("corridors") || !doc["corridors"].is_array())
    throw ConfigError("map config: missing 'corridors' list");
  std::set<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& c : doc["corridors"]) {
    if (!c.is_object() || !c.contains("a") || !c.contains("b") || !c.contains("weight"))
      throw ConfigError("map config: corridor needs a, b, weight: " + c.dump());
    const auto a_name = normalize_room_name(c["a"].get<std::string>());
    const auto b_name = normalize_room_name(c["b"].get<std::string>());
    auto a = m.find(a_name);
    auto b = m.find(b_name);
    if (!a) throw ConfigError("map config: corridor references unknown room '" + a_name + "'");
    if (!b) throw ConfigError("map config: corridor references unknown room '" + b_name + "'");
    if (*a == *b) throw ConfigError("map config: self-loop corridor at '" + a_name + "'");
    const auto& w = c["weight"];
    if (!w.is_number_integer() || w.get<long long>() < 1 ||
        w.get<long long>() > std::numeric_limits<int>::max() / 1024)
      throw ConfigError("map config: invalid weight " + w.dump() + " on corridor " + a_name + "-" + b_name);
    auto lo = std::min(*a, *b);
    auto hi = std::max(*a, *b);
    if (!pairs.insert({idx(lo), idx(hi)}).second)
      throw ConfigError("map config: duplicate corridor " + a_name + "-" + b_name);
    const int weight = w.get<int>();
    m.corridors_.push_back({lo, hi, weight});
    m.adjacency_[idx(lo)].push_back({hi, weight});
    m.adjacency_[idx(hi)].push_back({lo, weight});
  }
  std::sort(m.corridors_.begin(), m.corridors_.end(), [](const Corridor& x, const Corridor& y) {
    return std::tie(x.a, x.b) < std::tie(y.a, y.b);
  });
  for (auto& adj : m.adjacency_) {
    std::sort(adj.begin(), adj.end(), [](const Neighbor& x, const Neighbor& y) { return x.room < y.room; });
  }

  // Connectivity.
  {
    std::vector<bool> reached(n_rooms, false);
    std::vector<std::size_t> stack{0};
    reached[0] = true;
    while (!stack.empty()) {
      auto r = stack.back();
      stack.pop_back();
      for (const auto& nb : m.adjacency_[r]) {
        if (!reached[idx(nb.room)]) {
          reached[idx(nb.room)] = true;
          stack.push_back(idx(nb.room));
        }
      }
    }
    for (std::size_t r = 0; r < n_rooms; ++r) {
      if (!reached[r]) throw ConfigError("map config: graph is disconnected; room '" + m.names_[r] + "' unreachable");
    }
  }

  if (doc.contains("task_rooms")) {
    std::set<RoomIndex> tr;
    for (const auto& t : string_list(doc, "task_rooms")) {
      auto r = m.find(t);
      if (!r) throw ConfigError("map config: unknown task room '" + t + "'");
      tr.insert(*r);
    }
    m.task_rooms_.assign(tr.begin(), tr.end());
  } else {
    for (std::size_t r = 0; r < n_rooms; ++r) m.task_rooms_.push_back(static_cast<RoomIndex>(r));
  }

  {
    const auto e = doc.value("emergency_room", std::string("cafeteria"));
    auto r = m.find(e);
    if (!r) throw ConfigError("map config: unknown emergency_room '" + e + "'");
    m.emergency_ = *r;
  }

  if (doc.contains("layout")) {
    const auto& lay = doc["layout"];
    if (!lay.is_object()) throw ConfigError("map config: 'layout' must be an object");
    m.layout_.assign(n_rooms, {});
    std::vector<bool> placed(n_rooms, false);
    for (const auto& [k, v] : lay.items()) {
      auto r = m.find(k);
      if (!r) throw ConfigError("map config: layout for unknown room '" + k + "'");
      if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw ConfigError("map config: layout for '" + k + "' must be [x, y]");
      m.layout_[idx(*r)] = {v[0].get<double>(), v[1].get<double>()};
      placed[idx(*r)] = true;
    }
    if (std::find(placed.begin(), placed.end(), false) != placed.end())
      throw ConfigError("map config: layout must place every room or none");
  }

  // All-pairs distances (Floyd-Warshall; maps are small).
  const int inf = std::numeric_limits<int>::max() / 4;
  m.dist_.assign(n_rooms, std::vector<int>(n_rooms, inf));
  for (std::size_t r = 0; r < n_rooms; ++r) m.dist_[r][r] = 0;
  for (const auto& c : m.corridors_) {
    m.dist_[idx(c.a)][idx(c.b)] = c.weight;
    m.dist_[idx(c.b)][idx(c.a)] = c.weight;
  }
  for (std::size_t k = 0; k < n_rooms; ++k)
    for (std::size_t i = 0; i < n_rooms; ++i)
      for (std::size_t j = 0; j < n_rooms; ++j)
        m.dist_[i][j] = std::min(m.dist_[i][j], m.dist_[i][k] + m.dist_[k][j]);

  m.hash_ = hex64(fnv1a(m.to_json().dump()));
  return m;
}

std::optional<RoomIndex> Map::find(std::string_view mention) const {
  const auto n = normalize_room_name(mention);
  auto it = std::lower_bound(names_.begin(), names_.end(), n);
  if (it != names_.end() && *it == n) return static_cast<RoomIndex>(it - names_.begin());
  const auto sq = squash(n);
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (squash(names_[i]) == sq) return static_cast<RoomIndex>(i);
  }
  return std::nullopt;
}

RoomIndex Map::at(std::string_view mention) const {
  auto r = find(mention);
  if (!r) throw ConfigError("unknown room '" + std::string(mention) + "'");
  return *r;
}

std::optional<int> Map::weight(RoomIndex a, RoomIndex b) const {
  for (const auto& nb : adjacency_.at(idx(a))) {
    if (nb.room == b) return nb.weight;
  }
  return std::nullopt;
}

bool Map::is_task_room(RoomIndex r) const {
  return std::binary_search(task_rooms_.begin(), task_rooms_.end(), r);
}

std::optional<LayoutPoint> Map::layout(RoomIndex r) const {
  if (layout_.empty()) return std::nullopt;
  return layout_.at(idx(r));
}

TravelPlan Map::shortest_travel(RoomIndex from, RoomIndex to) const {
  if (idx(from) >= names_.size() || idx(to) >= names_.size()) throw ConfigError("shortest_travel: unknown room");
  // Dijkstra over (cost, path) labels. Positive weights make the lexicographic
  // tie-break on whole paths prefix-consistent, so the first settled label of
  // each room is its best one.
  using Label = std::pair<int, std::vector<RoomIndex>>;
  std::priority_queue<Label, std::vector<Label>, std::greater<>> open;
  std::vector<bool> settled(names_.size(), false);
  open.push({0, {from}});
  while (!open.empty()) {
    auto [cost, path] = open.top();
    open.pop();
    const auto here = path.back();
    if (settled[idx(here)]) continue;
    settled[idx(here)] = true;
    if (here == to) return {std::move(path), cost};
    for (const auto& nb : adjacency_[idx(here)]) {
      if (settled[idx(nb.room)]) continue;
      auto next = path;
      next.push_back(nb.room);
      open.push({cost + nb.weight, std::move(next)});
    }
  }
  throw ConfigError("shortest_travel: unreachable room");  // connected maps never get here
}

nlohmann::json Map::to_json() const {
  json doc;
  doc["id"] = id_;
  doc["version"] = 1;
  json rooms = json::array();
  for (auto r : listing_order_) rooms.push_back(name(r));
  doc["rooms"] = rooms;
  json cs = json::array();
  for (const auto& c : corridors_) cs.push_back({{"a", name(c.a)}, {"b", name(c.b)}, {"weight", c.weight}});
  doc["corridors"] = cs;
  json tr = json::array();
  for (auto r : task_rooms_) tr.push_back(name(r));
  doc["task_rooms"] = tr;
  doc["emergency_room"] = name(emergency_);
  if (!layout_.empty()) {
    json lay = json::object();
    for (std::size_t r = 0; r < names_.size(); ++r) lay[names_[r]] = {layout_[r].x, layout_[r].y};
    doc["layout"] = lay;
  }
  return doc;
}

const Map& default_map() {
  static const Map m = Map::load(bundled_asset("maps/default.json"));
  return m;
}

}  // namespace quack
