#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "quack/map.hpp"

namespace quack {

enum class PlayerId : std::uint8_t {};
constexpr std::size_t idx(PlayerId p) { return static_cast<std::size_t>(p); }
constexpr PlayerId player_at(std::size_t i) { return static_cast<PlayerId>(i); }

enum class Role { Goose, Duck };
enum class Team { Geese, Ducks };
enum class Phase { FreeRoam, Discussion, Voting, Ejection, GameOver };
enum class WinReason { TasksComplete, AllDucksEjected, Parity, Timeout };

std::string_view to_string(Role r);
std::string_view to_string(Team t);
std::string_view to_string(Phase p);
std::string_view to_string(WinReason w);
Role role_from(std::string_view s);
Team team_from(std::string_view s);
Phase phase_from(std::string_view s);
WinReason win_reason_from(std::string_view s);

// Default seat names; seats beyond the list are "Player<N>".
std::vector<std::string> default_player_names(std::size_t n);

struct GameConfig {
  int n_agents = 6;
  int n_ducks = 1;
  int tasks_per_goose = 5;
  int kill_cooldown = 5;
  int task_duration = 2;
  int tick_budget = 60;
  int discussion_rounds = 2;
  int meeting_budget = 3;
  std::uint64_t seed = 0;

  // Throws ConfigError when an invariant fails.
  void validate() const;
  // Throws ConfigError when k distinct task rooms cannot be drawn from the map.
  void validate_against(const Map& map) const;

  nlohmann::json to_json() const;
  // Missing fields keep their defaults; unknown fields are rejected.
  static GameConfig from_json(const nlohmann::json& doc);
  bool operator==(const GameConfig&) const = default;
};

struct Transit {
  RoomIndex from;
  RoomIndex to;
  int remaining;  // ticks left, in [1, w(from, to)]
  bool operator==(const Transit&) const = default;
};

using Location = std::variant<RoomIndex, Transit>;

inline std::optional<RoomIndex> room_of(const Location& loc) {
  if (const auto* r = std::get_if<RoomIndex>(&loc)) return *r;
  return std::nullopt;
}
inline bool in_transit(const Location& loc) { return std::holds_alternative<Transit>(loc); }

struct TaskState {
  RoomIndex room;
  int progress = 0;  // consecutive do_task ticks so far
  bool done = false;
  bool operator==(const TaskState&) const = default;
};

struct AgentState {
  PlayerId id{};
  std::string name;
  Role role = Role::Goose;
  bool alive = true;
  Location location = RoomIndex{};
  std::vector<TaskState> tasks;  // fake for Ducks
  std::vector<RoomIndex> visited;  // sorted, unique
  int cooldown = 0;                // Ducks only

  void visit(RoomIndex r);
  void reset_partial_progress();
  bool is_duck() const { return role == Role::Duck; }
};

struct BodyRecord {
  PlayerId victim;
  RoomIndex room;
  int death_tick;
  bool operator==(const BodyRecord&) const = default;
};

struct ChatLine {
  PlayerId speaker;
  RoomIndex room;
  std::string text;
};

enum class MoveDirection { Departed, Arrived };

// A movement seen at a room's door this tick. `room` is the observed room,
// `other` the far end of the corridor.
struct WitnessedMove {
  PlayerId mover;
  RoomIndex room;
  RoomIndex other;
  MoveDirection direction;
  std::vector<PlayerId> witnesses;  // living occupants of `room` at that moment
};

struct TickBuffers {
  std::vector<ChatLine> chat;
  std::vector<WitnessedMove> moves;
  void clear() {
    chat.clear();
    moves.clear();
  }
};

// nullopt target = skip.
struct Ballot {
  std::optional<PlayerId> target;
  std::string note;  // non-empty when a fallback produced this ballot
};

enum class TriggerKind { BodyReport, Emergency };

struct MeetingTrigger {
  TriggerKind kind = TriggerKind::BodyReport;
  PlayerId caller{};
  std::vector<PlayerId> victims;  // reported bodies, earliest death first
};

struct TranscriptLine {
  PlayerId speaker;
  int round;
  std::string text;
};

struct MeetingRecord {
  int index = 0;
  int tick = 0;
  std::uint64_t trigger_seq = 0;
  MeetingTrigger trigger;
  std::vector<PlayerId> speaking_order;
  std::vector<TranscriptLine> transcript;
  std::map<PlayerId, Ballot> votes;
  bool decided = false;
  std::optional<PlayerId> ejected;
};

struct Outcome {
  Team winner;
  WinReason reason;
  bool operator==(const Outcome&) const = default;
};

// Full engine state at a tick. The engine's random generator lives beside it
// in Game, since replay reconstructs everything here without consulting it.
struct GameState {
  int tick = 0;
  Phase phase = Phase::FreeRoam;
  std::vector<AgentState> agents;
  std::vector<BodyRecord> bodies;
  TickBuffers buffers;
  int meetings_used = 0;  // emergency meetings only
  int meetings_held = 0;  // all meetings
  std::optional<MeetingRecord> meeting;
  std::optional<Outcome> outcome;

  const AgentState& agent(PlayerId p) const { return agents.at(idx(p)); }
  AgentState& agent(PlayerId p) { return agents.at(idx(p)); }
  std::optional<PlayerId> find_player(std::string_view name) const;
  std::vector<PlayerId> living() const;
  // Living agents whose location is exactly room r (not in a corridor).
  std::vector<PlayerId> occupants(RoomIndex r) const;
  int living_count(Role r) const;
};

// Canonical serialization (stable key order). Used for replay equivalence and
// the GameOver digest.
nlohmann::json canonical_state(const GameState& s, const Map& map);
std::string state_digest(const GameState& s, const Map& map);

// -- Actions -----------------------------------------------------------------

enum class ActionKind { Wait, Move, DoTask, Report, CallMeeting, Kill };

struct Action {
  ActionKind kind = ActionKind::Wait;
  std::optional<RoomIndex> room;     // move destination
  std::optional<PlayerId> target;    // kill victim
  std::optional<std::string> say;    // proximity chat attachment
  std::string note;                  // set when the action is a fallback

  static Action wait() { return {}; }
  static Action move(RoomIndex r) { return {ActionKind::Move, r, std::nullopt, std::nullopt, {}}; }
  static Action do_task() { return {ActionKind::DoTask, std::nullopt, std::nullopt, std::nullopt, {}}; }
  static Action report() { return {ActionKind::Report, std::nullopt, std::nullopt, std::nullopt, {}}; }
  static Action call_meeting() { return {ActionKind::CallMeeting, std::nullopt, std::nullopt, std::nullopt, {}}; }
  static Action kill(PlayerId p) { return {ActionKind::Kill, std::nullopt, p, std::nullopt, {}}; }

  // Same choice, ignoring the say attachment and annotations.
  bool same_choice(const Action& o) const { return kind == o.kind && room == o.room && target == o.target; }
};

// "move(medbay)", "kill(Eve)", "do_task()", ...
std::string format_action(const Action& a, const Map& map, const GameState& s);

}  // namespace quack
