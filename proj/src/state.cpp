#include "quack/state.hpp"

#include <algorithm>
#include <array>
#include <set>

#include "quack/error.hpp"
#include "quack/util.hpp"

namespace quack {

using nlohmann::json;

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::array<std::string_view, N>& names, const char* what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<E>(i);
  }
  throw Error(std::string("unknown ") + what + " '" + std::string(s) + "'");
}

constexpr std::array<std::string_view, 2> kRoles{"goose", "duck"};
constexpr std::array<std::string_view, 2> kTeams{"geese", "ducks"};
constexpr std::array<std::string_view, 5> kPhases{"free_roam", "discussion", "voting", "ejection", "game_over"};
constexpr std::array<std::string_view, 4> kReasons{"tasks_complete", "all_ducks_ejected", "parity", "timeout"};

}  // namespace

std::string_view to_string(Role r) { return kRoles[static_cast<std::size_t>(r)]; }
std::string_view to_string(Team t) { return kTeams[static_cast<std::size_t>(t)]; }
std::string_view to_string(Phase p) { return kPhases[static_cast<std::size_t>(p)]; }
std::string_view to_string(WinReason w) { return kReasons[static_cast<std::size_t>(w)]; }
Role role_from(std::string_view s) { return parse_enum<Role>(s, kRoles, "role"); }
Team team_from(std::string_view s) { return parse_enum<Team>(s, kTeams, "team"); }
Phase phase_from(std::string_view s) { return parse_enum<Phase>(s, kPhases, "phase"); }
WinReason win_reason_from(std::string_view s) { return parse_enum<WinReason>(s, kReasons, "win reason"); }

std::vector<std::string> default_player_names(std::size_t n) {
  static constexpr std::array<const char*, 12> kNames{"Alice", "Bob",  "Charlie", "Diana", "Eve",   "Frank",
                                                      "Grace", "Heidi", "Ivan",   "Judy",  "Mallory", "Niaj"};
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.emplace_back(i < kNames.size() ? std::string(kNames[i]) : "Player" + std::to_string(i + 1));
  }
  return out;
}

// -- GameConfig ----------------------------------------------------------------

void GameConfig::validate() const {
  if (n_agents < 2 || n_agents > 200) throw ConfigError("config: n_agents must be in [2, 200]");
  if (n_ducks < 1 || n_ducks >= n_agents) throw ConfigError("config: need 1 <= n_ducks < n_agents");
  if (tasks_per_goose < 0) throw ConfigError("config: tasks_per_goose must be >= 0");
  if (kill_cooldown < 0) throw ConfigError("config: kill_cooldown must be >= 0");
  if (task_duration < 1) throw ConfigError("config: task_duration must be >= 1");
  if (tick_budget < 1) throw ConfigError("config: tick_budget must be >= 1");
  if (discussion_rounds < 1) throw ConfigError("config: discussion_rounds must be >= 1");
  if (meeting_budget < 0) throw ConfigError("config: meeting_budget must be >= 0");
}

void GameConfig::validate_against(const Map& map) const {
  validate();
  if (static_cast<std::size_t>(tasks_per_goose) > map.task_rooms().size())
    throw ConfigError("config: cannot place " + std::to_string(tasks_per_goose) + " tasks in " +
                      std::to_string(map.task_rooms().size()) + " task rooms");
}

json GameConfig::to_json() const {
  return json{{"n_agents", n_agents},
              {"n_ducks", n_ducks},
              {"tasks_per_goose", tasks_per_goose},
              {"kill_cooldown", kill_cooldown},
              {"task_duration", task_duration},
              {"tick_budget", tick_budget},
              {"discussion_rounds", discussion_rounds},
              {"meeting_budget", meeting_budget},
              {"seed", seed}};
}

GameConfig GameConfig::from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config: expected an object");
  GameConfig c;
  static const std::set<std::string> known{"n_agents",      "n_ducks",     "tasks_per_goose",
                                           "kill_cooldown", "task_duration", "tick_budget",
                                           "discussion_rounds", "meeting_budget", "seed"};
  for (const auto& [k, v] : doc.items()) {
    if (!known.count(k)) throw ConfigError("config: unknown field '" + k + "'");
    if (!v.is_number_integer()) throw ConfigError("config: field '" + k + "' must be an integer");
  }
  auto get = [&](const char* key, int& out) {
    if (doc.contains(key)) out = doc[key].get<int>();
  };
  get("n_agents", c.n_agents);
  get("n_ducks", c.n_ducks);
  get("tasks_per_goose", c.tasks_per_goose);
  get("kill_cooldown", c.kill_cooldown);
  get("task_duration", c.task_duration);
  get("tick_budget", c.tick_budget);
  get("discussion_rounds", c.discussion_rounds);
  get("meeting_budget", c.meeting_budget);
  if (doc.contains("seed")) c.seed = doc["seed"].get<std::uint64_t>();
  return c;
}

// -- AgentState / GameState ----------------------------------------------------

void AgentState::visit(RoomIndex r) {
  auto it = std::lower_bound(visited.begin(), visited.end(), r);
  if (it == visited.end() || *it != r) visited.insert(it, r);
}

void AgentState::reset_partial_progress() {
  for (auto& t : tasks) {
    if (!t.done) t.progress = 0;
  }
}

std::optional<PlayerId> GameState::find_player(std::string_view name) const {
  for (const auto& a : agents) {
    if (a.name == name) return a.id;
  }
  // Names are matched case-insensitively as a fallback.
  const auto lower = to_lower(name);
  for (const auto& a : agents) {
    if (to_lower(a.name) == lower) return a.id;
  }
  return std::nullopt;
}

std::vector<PlayerId> GameState::living() const {
  std::vector<PlayerId> out;
  for (const auto& a : agents) {
    if (a.alive) out.push_back(a.id);
  }
  return out;
}

std::vector<PlayerId> GameState::occupants(RoomIndex r) const {
  std::vector<PlayerId> out;
  for (const auto& a : agents) {
    if (a.alive && room_of(a.location) == r) out.push_back(a.id);
  }
  return out;
}

int GameState::living_count(Role r) const {
  return static_cast<int>(std::count_if(agents.begin(), agents.end(),
                                        [r](const AgentState& a) { return a.alive && a.role == r; }));
}

json canonical_state(const GameState& s, const Map& map) {
  auto pname = [&](PlayerId p) { return s.agent(p).name; };
  json agents = json::array();
  for (const auto& a : s.agents) {
    json loc;
    if (const auto* t = std::get_if<Transit>(&a.location)) {
      loc = {{"from", map.name(t->from)}, {"to", map.name(t->to)}, {"remaining", t->remaining}};
    } else {
      loc = map.name(std::get<RoomIndex>(a.location));
    }
    json tasks = json::array();
    for (const auto& t : a.tasks) tasks.push_back({map.name(t.room), t.progress, t.done});
    json visited = json::array();
    for (auto r : a.visited) visited.push_back(map.name(r));
    agents.push_back({{"name", a.name},
                      {"role", to_string(a.role)},
                      {"alive", a.alive},
                      {"location", loc},
                      {"tasks", tasks},
                      {"visited", visited},
                      {"cooldown", a.cooldown}});
  }
  json bodies = json::array();
  for (const auto& b : s.bodies) bodies.push_back({pname(b.victim), map.name(b.room), b.death_tick});
  json chat = json::array();
  for (const auto& c : s.buffers.chat) chat.push_back({pname(c.speaker), map.name(c.room), c.text});
  json moves = json::array();
  for (const auto& m : s.buffers.moves) {
    json w = json::array();
    for (auto p : m.witnesses) w.push_back(pname(p));
    moves.push_back({pname(m.mover), map.name(m.room), map.name(m.other),
                     m.direction == MoveDirection::Departed ? "departed" : "arrived", w});
  }
  json out{{"tick", s.tick},
           {"phase", to_string(s.phase)},
           {"agents", agents},
           {"bodies", bodies},
           {"chat", chat},
           {"moves", moves},
           {"meetings_used", s.meetings_used},
           {"meetings_held", s.meetings_held}};
  if (s.meeting) {
    const auto& m = *s.meeting;
    json order = json::array();
    for (auto p : m.speaking_order) order.push_back(pname(p));
    json transcript = json::array();
    for (const auto& l : m.transcript) transcript.push_back({pname(l.speaker), l.round, l.text});
    json votes = json::object();
    for (const auto& [voter, b] : m.votes) votes[pname(voter)] = b.target ? json(pname(*b.target)) : json(nullptr);
    json victims = json::array();
    for (auto v : m.trigger.victims) victims.push_back(pname(v));
    out["meeting"] = {{"index", m.index},
                      {"tick", m.tick},
                      {"trigger", m.trigger.kind == TriggerKind::BodyReport ? "report" : "emergency"},
                      {"caller", pname(m.trigger.caller)},
                      {"victims", victims},
                      {"order", order},
                      {"transcript", transcript},
                      {"votes", votes},
                      {"decided", m.decided},
                      {"ejected", m.ejected ? json(pname(*m.ejected)) : json(nullptr)}};
  }
  if (s.outcome) out["outcome"] = {to_string(s.outcome->winner), to_string(s.outcome->reason)};
  return out;
}

std::string state_digest(const GameState& s, const Map& map) { return hex64(fnv1a(canonical_state(s, map).dump())); }

std::string format_action(const Action& a, const Map& map, const GameState& s) {
  switch (a.kind) {
    case ActionKind::Wait: return "wait";
    case ActionKind::Move: return "move(" + map.name(*a.room) + ")";
    case ActionKind::DoTask: return "do_task()";
    case ActionKind::Report: return "report()";
    case ActionKind::CallMeeting: return "call_meeting()";
    case ActionKind::Kill: return "kill(" + s.agent(*a.target).name + ")";
  }
  return "wait";
}

}  // namespace quack
