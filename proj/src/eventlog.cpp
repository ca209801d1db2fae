#include "quack/eventlog.hpp"

#include <algorithm>
#include <array>
#include <map>

#include "quack/error.hpp"
#include "quack/util.hpp"

namespace quack {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 22> kKindNames{
    "GameStart",     "RoleAssigned",       "TaskAssigned", "MoveStarted", "MoveProgressed", "Arrived",
    "TaskProgressed", "TaskCompleted",     "Waited",       "Said",        "Killed",         "BodyReported",
    "MeetingCalled", "SpeakingOrderFixed", "Utterance",    "VoteCast",    "Ejected",        "NoEjection",
    "Respawned",     "CooldownTick",       "PhaseChanged", "GameOver"};

}  // namespace

std::string_view to_string(EventKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

std::optional<EventKind> event_kind_from(std::string_view s) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == s) return static_cast<EventKind>(i);
  }
  return std::nullopt;
}

const std::vector<std::string_view>& required_fields(EventKind k) {
  static const std::map<EventKind, std::vector<std::string_view>> table{
      {EventKind::GameStart, {"players", "spawn"}},
      {EventKind::RoleAssigned, {"player", "role"}},
      {EventKind::TaskAssigned, {"player", "task", "room", "fake"}},
      {EventKind::MoveStarted, {"player", "from", "to", "weight", "witnesses"}},
      {EventKind::MoveProgressed, {"player", "from", "to", "remaining"}},
      {EventKind::Arrived, {"player", "from", "to", "witnesses"}},
      {EventKind::TaskProgressed, {"player", "task", "room", "progress"}},
      {EventKind::TaskCompleted, {"player", "task", "room"}},
      {EventKind::Waited, {"player", "room"}},
      {EventKind::Said, {"player", "room", "text"}},
      {EventKind::Killed, {"killer", "victim", "room"}},
      {EventKind::BodyReported, {"player", "room", "victims"}},
      {EventKind::MeetingCalled, {"player", "room", "meetings_used"}},
      {EventKind::SpeakingOrderFixed, {"meeting", "trigger", "caller", "order"}},
      {EventKind::Utterance, {"meeting", "speaker", "round", "text"}},
      {EventKind::VoteCast, {"meeting", "voter", "target"}},
      {EventKind::Ejected, {"meeting", "player"}},
      {EventKind::NoEjection, {"meeting"}},
      {EventKind::Respawned, {"positions"}},
      {EventKind::CooldownTick, {"player", "remaining"}},
      {EventKind::PhaseChanged, {"from", "to", "cancelled"}},
      {EventKind::GameOver, {"winner", "reason", "digest"}},
  };
  return table.at(k);
}

bool Event::is_action() const {
  switch (kind) {
    case EventKind::MoveStarted:
    case EventKind::TaskProgressed:
    case EventKind::Waited:
    case EventKind::Killed:
    case EventKind::BodyReported:
    case EventKind::MeetingCalled:
      return true;
    default:
      return false;
  }
}

void GameLog::append(Event e) {
  if (complete()) throw SequenceError("log already ended with GameOver");
  if (e.seq != next_seq())
    throw SequenceError("expected seq " + std::to_string(next_seq()) + ", got " + std::to_string(e.seq));
  if (!events_.empty() && e.tick < events_.back().tick)
    throw SequenceError("tick went backwards at seq " + std::to_string(e.seq));
  events_.push_back(std::move(e));
}

std::string GameLog::serialize_header(const LogHeader& h) {
  json doc{{"schema", h.schema},
           {"map", h.map},
           {"map_hash", h.map_hash},
           {"config", h.config.to_json()},
           {"players", h.players},
           {"meta", h.meta}};
  return doc.dump();
}

std::string GameLog::serialize_event(const Event& e) {
  json doc = e.payload;
  doc["kind"] = to_string(e.kind);
  doc["seq"] = e.seq;
  doc["tick"] = e.tick;
  return doc.dump();
}

std::string GameLog::serialize() const {
  std::string out = serialize_header(header_);
  out += '\n';
  for (const auto& e : events_) {
    out += serialize_event(e);
    out += '\n';
  }
  return out;
}

namespace {

void check_schema(const std::string& schema) {
  constexpr std::string_view prefix = "quack-log/";
  if (schema.rfind(prefix, 0) != 0) throw LogParseError(1, "unknown schema '" + schema + "'");
  const auto version = schema.substr(prefix.size());
  const auto dot = version.find('.');
  if (version.substr(0, dot) != "1") throw LogParseError(1, "unsupported schema version '" + version + "'");
}

LogHeader parse_header(const json& doc) {
  if (!doc.is_object()) throw LogParseError(1, "header must be an object");
  for (const char* key : {"schema", "map", "map_hash", "config", "players"}) {
    if (!doc.contains(key)) throw LogParseError(1, std::string("header missing '") + key + "'");
  }
  LogHeader h;
  if (!doc["schema"].is_string()) throw LogParseError(1, "schema must be a string");
  h.schema = doc["schema"].get<std::string>();
  check_schema(h.schema);
  h.map = doc["map"];
  if (!doc["map_hash"].is_string()) throw LogParseError(1, "map_hash must be a string");
  h.map_hash = doc["map_hash"].get<std::string>();
  try {
    h.config = GameConfig::from_json(doc["config"]);
  } catch (const ConfigError& e) {
    throw LogParseError(1, e.what());
  }
  if (!doc["players"].is_array()) throw LogParseError(1, "players must be an array");
  for (const auto& p : doc["players"]) {
    if (!p.is_string()) throw LogParseError(1, "player names must be strings");
    h.players.push_back(p.get<std::string>());
  }
  if (doc.contains("meta")) h.meta = doc["meta"];
  return h;
}

}  // namespace

GameLog parse_log(std::string_view bytes) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  std::optional<GameLog> log;
  while (pos < bytes.size()) {
    auto end = bytes.find('\n', pos);
    if (end == std::string_view::npos) end = bytes.size();
    auto line = bytes.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;

    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::parse_error& e) {
      throw LogParseError(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!log) {
      log.emplace(parse_header(doc));
      continue;
    }
    if (!doc.is_object()) throw LogParseError(line_no, "event must be an object");
    for (const char* key : {"kind", "seq", "tick"}) {
      if (!doc.contains(key)) throw LogParseError(line_no, std::string("event missing '") + key + "'");
    }
    if (!doc["kind"].is_string()) throw LogParseError(line_no, "kind must be a string");
    const auto kind = event_kind_from(doc["kind"].get<std::string>());
    if (!kind) throw LogParseError(line_no, "unknown event kind '" + doc["kind"].get<std::string>() + "'");
    if (!doc["seq"].is_number_unsigned()) throw LogParseError(line_no, "seq must be a non-negative integer");
    if (!doc["tick"].is_number_integer() || doc["tick"].get<long long>() < 0)
      throw LogParseError(line_no, "tick must be a non-negative integer");
    Event e;
    e.kind = *kind;
    e.seq = doc["seq"].get<std::uint64_t>();
    e.tick = doc["tick"].get<int>();
    doc.erase("kind");
    doc.erase("seq");
    doc.erase("tick");
    for (auto key : required_fields(e.kind)) {
      if (!doc.contains(std::string(key)))
        throw LogParseError(line_no, std::string(to_string(e.kind)) + " missing '" + std::string(key) + "'");
    }
    e.payload = std::move(doc);
    try {
      log->append(std::move(e));
    } catch (const SequenceError& err) {
      throw LogParseError(line_no, err.what());
    }
  }
  if (!log) throw LogParseError(0, "empty log");
  if (!log->complete()) throw IncompleteLogError("log has no GameOver event");
  return std::move(*log);
}

GameLog read_log(const std::string& path) { return parse_log(read_file(path)); }

void write_log(const std::string& path, const GameLog& log) { write_file(path, log.serialize()); }

Map map_of(const GameLog& log) {
  Map m = Map::load(log.header().map.dump());
  if (m.hash() != log.header().map_hash) throw LogParseError(1, "map_hash does not match embedded map");
  return m;
}

std::vector<Role> roles_of(const GameLog& log) {
  const auto& players = log.header().players;
  std::vector<Role> roles(players.size(), Role::Goose);
  for (const auto& e : log.events()) {
    if (e.kind != EventKind::RoleAssigned) continue;
    auto it = std::find(players.begin(), players.end(), e.str("player"));
    if (it == players.end()) throw LogParseError(0, "RoleAssigned for unknown player " + e.str("player"));
    roles[static_cast<std::size_t>(it - players.begin())] = role_from(e.str("role"));
  }
  return roles;
}

std::vector<LoggedMeeting> meetings_of(const GameLog& log) {
  const auto& players = log.header().players;
  auto pid = [&](const std::string& name) {
    auto it = std::find(players.begin(), players.end(), name);
    if (it == players.end()) throw LogParseError(0, "unknown player " + name);
    return player_at(static_cast<std::size_t>(it - players.begin()));
  };

  std::vector<LoggedMeeting> out;
  const Event* last_trigger = nullptr;
  LoggedMeeting* cur = nullptr;
  for (const auto& e : log.events()) {
    switch (e.kind) {
      case EventKind::BodyReported:
      case EventKind::MeetingCalled:
        last_trigger = &e;
        break;
      case EventKind::PhaseChanged:
        if (e.str("to") == "discussion") {
          if (!last_trigger) throw LogParseError(0, "meeting without trigger");
          LoggedMeeting m;
          m.first_seq = e.seq;
          m.record.index = static_cast<int>(out.size());
          m.record.tick = e.tick;
          m.record.trigger_seq = last_trigger->seq;
          m.record.trigger.caller = pid(last_trigger->str("player"));
          if (last_trigger->kind == EventKind::BodyReported) {
            m.record.trigger.kind = TriggerKind::BodyReport;
            for (const auto& v : last_trigger->payload.at("victims")) m.record.trigger.victims.push_back(pid(v));
          } else {
            m.record.trigger.kind = TriggerKind::Emergency;
          }
          out.push_back(std::move(m));
          cur = &out.back();
          last_trigger = nullptr;
        }
        break;
      case EventKind::SpeakingOrderFixed:
        if (cur) {
          for (const auto& p : e.payload.at("order")) cur->record.speaking_order.push_back(pid(p));
        }
        break;
      case EventKind::Utterance:
        if (cur) cur->record.transcript.push_back({pid(e.str("speaker")), e.num("round"), e.str("text")});
        break;
      case EventKind::VoteCast:
        if (cur) {
          Ballot b;
          if (!e.payload.at("target").is_null()) b.target = pid(e.str("target"));
          if (e.payload.contains("note")) b.note = e.str("note");
          cur->record.votes[pid(e.str("voter"))] = b;
        }
        break;
      case EventKind::Ejected:
        if (cur) {
          cur->record.decided = true;
          cur->record.ejected = pid(e.str("player"));
        }
        break;
      case EventKind::NoEjection:
        if (cur) cur->record.decided = true;
        break;
      case EventKind::Respawned:
        if (cur) {
          cur->respawn_seq = e.seq;
          cur = nullptr;
        }
        break;
      case EventKind::GameOver:
        if (cur) {
          cur->terminal = true;
          cur = nullptr;
        }
        break;
      default:
        break;
    }
  }
  return out;
}

}  // namespace quack
