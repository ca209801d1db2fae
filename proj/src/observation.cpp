#include "quack/observation.hpp"

#include <algorithm>
#include <sstream>

#include "quack/error.hpp"

namespace quack {

StructuredSummary build_summary(const GameState& s, const Map& map, const GameConfig& cfg, PlayerId viewer) {
  if (idx(viewer) >= s.agents.size()) throw RuleError("unknown viewer");
  const auto& me = s.agent(viewer);
  if (!me.alive) throw RuleError("viewer " + me.name + " is dead");

  StructuredSummary out;
  out.tick = s.tick;
  out.phase = s.phase;
  out.viewer = me.name;
  out.role = me.role;
  if (me.is_duck()) {
    for (const auto& a : s.agents) {
      if (a.id != viewer && a.is_duck()) out.teammates.push_back(a.name);
    }
    out.kill_cooldown = me.cooldown;
  }

  if (const auto* t = std::get_if<Transit>(&me.location)) {
    out.transit_from = map.name(t->from);
    out.transit_to = map.name(t->to);
    out.transit_remaining = t->remaining;
  } else {
    const auto here = std::get<RoomIndex>(me.location);
    out.room = map.name(here);
    for (auto p : s.occupants(here)) {
      if (p != viewer) out.players_here.push_back(s.agent(p).name);
    }
    for (const auto& b : s.bodies) {
      if (b.room == here) out.bodies_here.push_back(s.agent(b.victim).name);
    }
    for (const auto& nb : map.adjacent(here)) out.adjacent.push_back({map.name(nb.room), nb.weight});
    for (const auto& c : s.buffers.chat) {
      if (c.room == here && c.speaker != viewer) out.chat.push_back({s.agent(c.speaker).name, c.text});
    }
  }
  for (const auto& m : s.buffers.moves) {
    if (std::find(m.witnesses.begin(), m.witnesses.end(), viewer) == m.witnesses.end()) continue;
    out.moves.push_back({s.agent(m.mover).name, m.direction == MoveDirection::Departed, map.name(m.room),
                         map.name(m.other)});
  }
  for (const auto& t : me.tasks) out.tasks.push_back({map.name(t.room), t.progress, cfg.task_duration, t.done});

  if (s.meeting && (s.phase == Phase::Discussion || s.phase == Phase::Voting)) {
    const auto& m = *s.meeting;
    MeetingView mv;
    mv.reason = m.trigger.kind == TriggerKind::BodyReport ? "report" : "emergency";
    mv.caller = s.agent(m.trigger.caller).name;
    for (auto v : m.trigger.victims) mv.victims.push_back(s.agent(v).name);
    for (auto p : m.speaking_order) mv.speaking_order.push_back(s.agent(p).name);
    for (const auto& l : m.transcript) mv.transcript.push_back({s.agent(l.speaker).name, l.round, l.text});
    // Absence from the table is public.
    for (const auto& a : s.agents) {
      if (!a.alive) mv.known_dead.push_back(a.name);
    }
    out.meeting = std::move(mv);
  }
  if (s.meeting && s.phase == Phase::Ejection && s.meeting->decided) {
    out.meeting_result = s.meeting->ejected ? s.agent(*s.meeting->ejected).name + " was ejected."
                                            : std::string("No one was ejected.");
  }
  return out;
}

namespace {

std::string join(const std::vector<std::string>& v) {
  if (v.empty()) return "none";
  std::string out;
  for (const auto& x : v) {
    if (!out.empty()) out += ", ";
    out += x;
  }
  return out;
}

}  // namespace

std::string StructuredSummary::to_text() const {
  std::ostringstream o;
  o << "Tick " << tick << " | Phase: " << to_string(phase) << "\n";
  o << "You are " << viewer << " (" << to_string(role) << ").\n";
  if (!teammates.empty()) o << "Fellow Ducks: " << join(teammates) << "\n";
  if (room) {
    o << "Location: " << *room << "\n";
    o << "Players here: " << join(players_here) << "\n";
    o << "Bodies here: " << join(bodies_here) << "\n";
  } else {
    o << "In transit: " << *transit_from << " -> " << *transit_to << " (" << transit_remaining
      << (transit_remaining == 1 ? " tick" : " ticks") << " remaining)\n";
  }
  o << "Movement seen this tick:";
  if (moves.empty()) o << " none";
  o << "\n";
  for (const auto& m : moves) {
    if (m.departed) {
      o << "  - " << m.player << " departed " << m.room << " toward " << m.other << "\n";
    } else {
      o << "  - " << m.player << " arrived in " << m.room << " from " << m.other << "\n";
    }
  }
  if (room) {
    o << "Adjacent rooms:\n";
    for (const auto& a : adjacent) o << "  - " << a.room << " (cost " << a.cost << ")\n";
  }
  o << (role == Role::Duck ? "Fake tasks:\n" : "Tasks:\n");
  for (const auto& t : tasks) {
    o << "  - " << t.room << ": ";
    if (t.done) {
      o << "done\n";
    } else {
      o << t.progress << "/" << t.duration << "\n";
    }
  }
  o << "Chat heard this tick:";
  if (chat.empty()) o << " none";
  o << "\n";
  for (const auto& c : chat) o << "  - " << c.speaker << ": \"" << c.text << "\"\n";
  if (kill_cooldown) o << "Kill cooldown: " << *kill_cooldown << "\n";
  if (meeting) {
    const auto& m = *meeting;
    o << "Meeting: " << (m.reason == "report" ? "body report" : "emergency meeting") << " called by " << m.caller;
    if (!m.victims.empty()) o << "; bodies: " << join(m.victims);
    o << "\n";
    o << "Speaking order: " << join(m.speaking_order) << "\n";
    o << "Known dead: " << join(m.known_dead) << "\n";
    o << "Transcript so far:";
    if (m.transcript.empty()) o << " none";
    o << "\n";
    for (const auto& l : m.transcript) o << "  [round " << l.round << "] " << l.speaker << ": " << l.text << "\n";
  }
  if (meeting_result) o << "Meeting result: " << *meeting_result << "\n";
  return o.str();
}

Observation build_observation(const GameState& s, const Map& map, const GameConfig& cfg, PlayerId viewer) {
  Observation o;
  o.summary = build_summary(s, map, cfg, viewer);
  o.global_view = render_global(s, map, viewer);
  o.local_view = render_local(s, map, viewer);
  return o;
}

}  // namespace quack
