#include "quack/agents.hpp"

#include <algorithm>
#include <regex>
#include <sstream>
#include <tuple>

#include "quack/error.hpp"
#include "quack/util.hpp"

namespace quack {

// -- Memory ----------------------------------------------------------------------

int AgentMemory::segment() const {
  return static_cast<int>(std::count_if(meetings.begin(), meetings.end(),
                                        [](const MeetingMemory& m) { return !m.result.empty(); }));
}

namespace {

std::string join(const std::vector<std::string>& v, std::string_view sep = ", ") {
  std::string out;
  for (const auto& s : v) {
    if (!out.empty()) out += sep;
    out += s;
  }
  return out;
}

}  // namespace

std::string AgentMemory::digest(int window) const {
  int latest = 0;
  for (const auto& p : places) latest = std::max(latest, p.tick);
  for (const auto& a : actions) latest = std::max(latest, a.tick);
  const int from = window > 0 ? latest - window + 1 : 0;

  struct Line {
    int tick;
    int order;
    std::string text;
  };
  std::vector<Line> lines;
  for (const auto& p : places) {
    if (p.tick < from) continue;
    lines.push_back({p.tick, 0,
                     p.room.empty() ? "in the corridor " + p.corridor_from + " -> " + p.corridor_to
                                    : "in " + p.room});
  }
  for (const auto& e : encounters) {
    if (e.tick < from) continue;
    std::string t = "in " + e.room + " saw";
    t += e.players.empty() ? std::string(" nobody") : " " + join(e.players);
    if (!e.bodies.empty()) t += "; bodies: " + join(e.bodies);
    lines.push_back({e.tick, 1, std::move(t)});
  }
  for (const auto& m : moves) {
    if (m.tick < from) continue;
    lines.push_back({m.tick, 2,
                     m.departed ? m.player + " left " + m.room + " toward " + m.other
                                : m.player + " arrived in " + m.room + " from " + m.other});
  }
  for (const auto& c : chat) {
    if (c.tick < from) continue;
    lines.push_back({c.tick, 3, "heard " + c.speaker + " in " + c.room + ": \"" + c.text + "\""});
  }
  for (const auto& a : actions) {
    if (a.tick < from) continue;
    lines.push_back({a.tick, 4, "you chose " + a.action});
  }
  for (const auto& m : meetings) {
    std::string t = "meeting (" + m.reason + ", called by " + m.caller;
    if (!m.victims.empty()) t += ", bodies: " + join(m.victims);
    t += ")";
    for (const auto& l : m.transcript) t += "\n    [round " + std::to_string(l.round) + "] " + l.speaker + ": " + l.text;
    if (!m.result.empty()) t += "\n    result: " + m.result;
    lines.push_back({m.tick, 5, std::move(t)});
  }
  std::stable_sort(lines.begin(), lines.end(),
                   [](const Line& a, const Line& b) { return std::tie(a.tick, a.order) < std::tie(b.tick, b.order); });

  std::ostringstream o;
  if (lines.empty()) return "Nothing remembered yet.\n";
  for (const auto& l : lines) o << "t" << l.tick << ": " << l.text << "\n";
  return o.str();
}

void update_memory(AgentMemory& m, const StructuredSummary& obs) {
  if (m.self.empty()) m.self = obs.viewer;

  if (obs.meeting) {
    const auto& mv = *obs.meeting;
    if (m.meetings.empty() || m.meetings.back().tick != obs.tick) {
      m.meetings.push_back({obs.tick, mv.reason, mv.caller, mv.victims, {}, {}});
    }
    m.meetings.back().transcript = mv.transcript;
    return;
  }
  if (obs.meeting_result) {
    if (!m.meetings.empty() && m.meetings.back().tick == obs.tick) m.meetings.back().result = *obs.meeting_result;
    return;
  }
  if (obs.phase != Phase::FreeRoam) return;

  const int seg = m.segment();
  PlaceRecord place{obs.tick, seg, obs.room.value_or(""), obs.transit_from.value_or(""), obs.transit_to.value_or("")};
  const bool new_place = m.places.empty() || m.places.back().segment != seg ||
                         m.places.back().room != place.room || m.places.back().corridor_from != place.corridor_from ||
                         m.places.back().corridor_to != place.corridor_to;
  if (new_place) m.places.push_back(place);

  if (obs.room && (!obs.players_here.empty() || !obs.bodies_here.empty())) {
    const bool seen = !m.encounters.empty() && m.encounters.back().tick == obs.tick &&
                      m.encounters.back().room == *obs.room;
    if (!seen) m.encounters.push_back({obs.tick, seg, *obs.room, obs.players_here, obs.bodies_here});
  }
  for (const auto& mv : obs.moves) {
    MoveRecord r{obs.tick, seg, mv.player, mv.departed, mv.room, mv.other};
    if (std::find(m.moves.begin(), m.moves.end(), r) == m.moves.end()) m.moves.push_back(std::move(r));
  }
  for (const auto& c : obs.chat) {
    const bool seen = std::any_of(m.chat.begin(), m.chat.end(), [&](const ChatRecord& x) {
      return x.tick == obs.tick && x.speaker == c.speaker && x.text == c.text;
    });
    if (!seen) m.chat.push_back({obs.tick, seg, obs.room.value_or(""), c.speaker, c.text});
  }
}

void record_action(AgentMemory& m, int tick, const std::string& action, const std::string& room) {
  m.actions.push_back({tick, m.segment(), action, room});
}

// -- AgentTable ------------------------------------------------------------------

AgentTable::AgentTable(const Map& map, const GameConfig& cfg, std::vector<std::unique_ptr<Policy>> seats)
    : map_(&map), cfg_(cfg), seats_(std::move(seats)), memories_(seats_.size()) {
  if (seats_.size() != static_cast<std::size_t>(cfg.n_agents)) {
    throw ConfigError("expected " + std::to_string(cfg.n_agents) + " seats, got " + std::to_string(seats_.size()));
  }
}

Observation AgentTable::observe_for(const GameState& s, PlayerId p) {
  Observation obs;
  if (seats_.at(idx(p))->wants_views()) {
    obs = build_observation(s, *map_, cfg_, p);
  } else {
    obs.summary = build_summary(s, *map_, cfg_, p);
  }
  update_memory(memories_.at(idx(p)), obs.summary);
  return obs;
}

Action AgentTable::choose_action(const GameState& s, PlayerId agent, std::span<const Action> legal) {
  const auto obs = observe_for(s, agent);
  Action a = seats_.at(idx(agent))->act(obs, memories_.at(idx(agent)), legal);
  const bool ok = std::any_of(legal.begin(), legal.end(), [&](const Action& l) { return l.same_choice(a); });
  if (!ok) {
    Action w = Action::wait();
    w.say = a.say;
    w.note = "illegal_action_rejected";
    a = std::move(w);
  }
  const auto room = room_of(s.agent(agent).location);
  record_action(memories_.at(idx(agent)), s.tick, format_action(a, *map_, s), room ? map_->name(*room) : "");
  return a;
}

Speech AgentTable::speak(const GameState& s, PlayerId agent) {
  const auto obs = observe_for(s, agent);
  auto u = seats_.at(idx(agent))->speak(obs, memories_.at(idx(agent)));
  return {std::move(u.text), std::move(u.note)};
}

Ballot AgentTable::vote(const GameState& s, PlayerId agent) {
  const auto obs = observe_for(s, agent);
  auto c = seats_.at(idx(agent))->vote(obs, memories_.at(idx(agent)));
  Ballot b;
  b.note = std::move(c.note);
  if (c.target) {
    const auto p = s.find_player(*c.target);
    if (p && s.agent(*p).alive) {
      b.target = *p;
    } else {
      b.note = "invalid_vote_target";
    }
  }
  return b;
}

void AgentTable::observe(const GameState& s, PlayerId agent) { observe_for(s, agent); }

// -- Reply parsing ---------------------------------------------------------------

namespace {

std::string_view strip_wrapping(std::string_view s) {
  s = trim(s);
  while (s.size() >= 2 && ((s.front() == '`' && s.back() == '`') || (s.front() == '"' && s.back() == '"') ||
                           (s.front() == '\'' && s.back() == '\''))) {
    s = trim(s.substr(1, s.size() - 2));
  }
  return s;
}

std::optional<std::string> match_player(std::string_view name, const std::vector<std::string>& players) {
  for (const auto& p : players) {
    if (p == name) return p;
  }
  const auto low = to_lower(name);
  for (const auto& p : players) {
    if (to_lower(p) == low) return p;
  }
  return std::nullopt;
}

const std::regex& action_token() {
  static const std::regex re(R"(^([A-Za-z_]+)\s*(?:\(\s*([^()]*?)\s*\))?\s*\.?$)");
  return re;
}

bool looks_like_action(std::string_view s) {
  static const std::regex verb(R"(\b(wait|move|do_task|report|call_meeting|kill)\b)");
  const std::string str(s);
  return std::regex_search(str, verb);
}

Action parse_token(std::string_view raw, const Map& map, const std::vector<std::string>& players) {
  const std::string text(raw);
  std::smatch m;
  if (!std::regex_match(text, m, action_token())) {
    static const std::regex verbs(R"(\b(wait|move|do_task|report|call_meeting|kill)\b)");
    const auto n = std::distance(std::sregex_iterator(text.begin(), text.end(), verbs), std::sregex_iterator());
    if (n > 1) throw ResponseError(ResponseError::Kind::MultipleActions, "more than one action in: " + text);
    throw ResponseError(ResponseError::Kind::UnknownAction, "cannot parse action: " + text);
  }
  const auto verb = to_lower(m[1].str());
  const auto arg = m[2].str();
  const bool bare = arg.empty();
  if (verb == "wait" && bare) return Action::wait();
  if (verb == "do_task" && bare) return Action::do_task();
  if (verb == "report" && bare) return Action::report();
  if (verb == "call_meeting" && bare) return Action::call_meeting();
  if (verb == "move" && !bare) {
    const auto r = map.find(strip_wrapping(arg));
    if (!r) throw ResponseError(ResponseError::Kind::IllegalAction, "unknown room: " + arg);
    return Action::move(*r);
  }
  if (verb == "kill" && !bare) {
    const auto name = match_player(strip_wrapping(arg), players);
    if (!name) throw ResponseError(ResponseError::Kind::IllegalAction, "unknown player: " + arg);
    const auto it = std::find(players.begin(), players.end(), *name);
    Action a = Action::kill(player_at(static_cast<std::size_t>(it - players.begin())));
    return a;
  }
  throw ResponseError(ResponseError::Kind::UnknownAction, "unknown action: " + text);
}

}  // namespace

Action parse_action_reply(std::string_view text, const Map& map, const std::vector<std::string>& players,
                          std::span<const Action> legal) {
  auto body = strip_wrapping(text);
  // Models sometimes add a lead-in line; the action is taken from the last
  // non-empty line.
  if (const auto nl = body.find_last_of('\n'); nl != std::string_view::npos) {
    const auto last = trim(body.substr(nl + 1));
    if (!last.empty()) body = strip_wrapping(last);
  }
  if (body.empty()) throw ResponseError(ResponseError::Kind::Empty, "empty reply");

  std::optional<std::string> say;
  std::string_view head = body;
  if (const auto bar = body.find('|'); bar != std::string_view::npos) {
    head = trim(body.substr(0, bar));
    const auto tail = trim(body.substr(bar + 1));
    if (tail.size() >= 5 && to_lower(tail.substr(0, 4)) == "say(" && tail.back() == ')') {
      say = std::string(strip_wrapping(tail.substr(4, tail.size() - 5)));
    } else if (looks_like_action(tail)) {
      throw ResponseError(ResponseError::Kind::MultipleActions, "more than one action in: " + std::string(body));
    } else {
      throw ResponseError(ResponseError::Kind::UnknownAction, "cannot parse suffix: " + std::string(tail));
    }
  }
  Action a = parse_token(head, map, players);
  const bool ok = std::any_of(legal.begin(), legal.end(), [&](const Action& l) { return l.same_choice(a); });
  if (!ok) throw ResponseError(ResponseError::Kind::IllegalAction, "not legal now: " + std::string(head));
  if (say && !say->empty()) a.say = std::move(say);
  return a;
}

std::optional<std::string> parse_vote_reply(std::string_view text, const std::vector<std::string>& living) {
  auto body = strip_wrapping(text);
  while (!body.empty() && (body.back() == '.' || body.back() == '!')) body.remove_suffix(1);
  body = strip_wrapping(body);
  if (body.empty()) throw ResponseError(ResponseError::Kind::Empty, "empty vote");
  if (to_lower(body) == "skip") return std::nullopt;
  if (auto p = match_player(body, living)) return p;
  throw ResponseError(ResponseError::Kind::UnknownVote, "not a living player or skip: " + std::string(body));
}

std::string parse_utterance_reply(std::string_view text) { return std::string(trim(text)); }

}  // namespace quack
