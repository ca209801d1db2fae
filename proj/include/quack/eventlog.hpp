#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "quack/map.hpp"
#include "quack/state.hpp"

namespace quack {

// Schema of the line-delimited log. Parsers accept any 1.x and reject other
// major versions.
inline constexpr std::string_view kLogSchema = "quack-log/1.0";

enum class EventKind {
  GameStart,
  RoleAssigned,
  TaskAssigned,
  MoveStarted,
  MoveProgressed,
  Arrived,
  TaskProgressed,
  TaskCompleted,
  Waited,
  Said,
  Killed,
  BodyReported,
  MeetingCalled,
  SpeakingOrderFixed,
  Utterance,
  VoteCast,
  Ejected,
  NoEjection,
  Respawned,
  CooldownTick,
  PhaseChanged,
  GameOver,
};

std::string_view to_string(EventKind k);
std::optional<EventKind> event_kind_from(std::string_view s);

// Required payload keys per kind. Actions may additionally carry "note".
const std::vector<std::string_view>& required_fields(EventKind k);

struct Event {
  std::uint64_t seq = 0;
  int tick = 0;
  EventKind kind = EventKind::GameStart;
  nlohmann::json payload = nlohmann::json::object();

  const std::string& str(const char* key) const { return payload.at(key).get_ref<const std::string&>(); }
  int num(const char* key) const { return payload.at(key).get<int>(); }
  bool is_action() const;  // one free-roam decision of one agent
  bool operator==(const Event&) const = default;
};

struct LogHeader {
  std::string schema{kLogSchema};
  nlohmann::json map;  // canonical map document
  std::string map_hash;
  GameConfig config;
  std::vector<std::string> players;
  // Free-form run metadata (setting label, seat bindings). Not used by replay.
  nlohmann::json meta = nlohmann::json::object();

  bool operator==(const LogHeader&) const = default;
};

class GameLog {
 public:
  GameLog() = default;
  explicit GameLog(LogHeader header) : header_(std::move(header)) {}

  const LogHeader& header() const { return header_; }
  LogHeader& header() { return header_; }
  const std::vector<Event>& events() const { return events_; }

  std::uint64_t next_seq() const { return events_.empty() ? 0 : events_.back().seq + 1; }

  // Appends one event. Throws SequenceError when seq is not last+1, the tick
  // goes backwards, or the log already ended with GameOver.
  void append(Event e);

  bool complete() const { return !events_.empty() && events_.back().kind == EventKind::GameOver; }

  std::string serialize() const;
  static std::string serialize_header(const LogHeader& h);
  static std::string serialize_event(const Event& e);

 private:
  LogHeader header_;
  std::vector<Event> events_;
};

// Parses the line-delimited format. Throws LogParseError (with line number)
// for malformed content and IncompleteLogError when GameOver is missing.
GameLog parse_log(std::string_view bytes);
GameLog read_log(const std::string& path);
void write_log(const std::string& path, const GameLog& log);

// Rebuilds the Map embedded in a log header, checking its hash.
Map map_of(const GameLog& log);

// -- Derived views over a log -------------------------------------------------

struct LoggedMeeting {
  MeetingRecord record;
  std::uint64_t first_seq = 0;    // PhaseChanged -> Discussion
  std::uint64_t respawn_seq = 0;  // 0 when the game ended in this meeting
  bool terminal = false;
};

// Every meeting in the log, in order, with speaking order, transcript, votes
// and outcome filled in from the events.
std::vector<LoggedMeeting> meetings_of(const GameLog& log);

// Player name -> role, from RoleAssigned events.
std::vector<Role> roles_of(const GameLog& log);

}  // namespace quack
