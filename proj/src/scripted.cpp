#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "quack/agents.hpp"
#include "quack/claims.hpp"
#include "quack/error.hpp"
#include "quack/rng.hpp"

namespace quack {

namespace {

constexpr std::string_view kSegmentPhrase = "this round";

Claim make_claim(ClaimType type, const std::string& subject) {
  Claim c;
  c.type = type;
  c.subject = subject;
  c.temporal = std::string(kSegmentPhrase);
  return c;
}

bool has(std::span<const Action> legal, const Action& a) {
  return std::any_of(legal.begin(), legal.end(), [&](const Action& l) { return l.same_choice(a); });
}

std::optional<Action> find_kind(std::span<const Action> legal, ActionKind k) {
  for (const auto& a : legal) {
    if (a.kind == k) return a;
  }
  return std::nullopt;
}

int own_lines(const MeetingView& mv, const std::string& self) {
  return static_cast<int>(
      std::count_if(mv.transcript.begin(), mv.transcript.end(), [&](const SpokenLine& l) { return l.speaker == self; }));
}

// Common plumbing for the scripted seats.
class ScriptedPolicy : public Policy {
 public:
  explicit ScriptedPolicy(const SeatContext& ctx) : ctx_(ctx), rng_(ctx.seed) {}

 protected:
  const Map& map() const { return *ctx_.map; }

  // Rooms occupied in the current free-roam stretch, in order, consecutive
  // repeats folded. The meeting-time room is appended: an arrival can land
  // between the last query and the trigger.
  std::vector<std::string> segment_rooms(const StructuredSummary& s, const AgentMemory& mem) const {
    std::vector<std::string> out;
    const int seg = mem.segment();
    for (const auto& p : mem.places) {
      if (p.segment != seg || p.room.empty()) continue;
      if (out.empty() || out.back() != p.room) out.push_back(p.room);
    }
    if (s.room && (out.empty() || out.back() != *s.room)) out.push_back(*s.room);
    return out;
  }

  std::optional<std::string> last_task_room(const AgentMemory& mem) const {
    const int seg = mem.segment();
    for (auto it = mem.actions.rbegin(); it != mem.actions.rend(); ++it) {
      if (it->segment != seg) break;
      if (it->action == "do_task()" && !it->room.empty()) return it->room;
    }
    return std::nullopt;
  }

  // Latest distinct players seen this stretch, newest first.
  std::vector<std::pair<std::string, std::string>> recent_sightings(const AgentMemory& mem,
                                                                    const std::vector<std::string>& dead,
                                                                    std::size_t limit) const {
    std::vector<std::pair<std::string, std::string>> out;
    std::set<std::string> taken;
    const int seg = mem.segment();
    for (auto it = mem.encounters.rbegin(); it != mem.encounters.rend() && out.size() < limit; ++it) {
      if (it->segment != seg) break;
      for (const auto& p : it->players) {
        if (out.size() >= limit) break;
        if (taken.count(p) || std::find(dead.begin(), dead.end(), p) != dead.end()) continue;
        taken.insert(p);
        out.emplace_back(p, it->room);
      }
    }
    return out;
  }

  // Truthful whereabouts: a route (or single location) plus the last task.
  std::string whereabouts(const StructuredSummary& s, const AgentMemory& mem) const {
    std::string text;
    const auto rooms = segment_rooms(s, mem);
    if (rooms.size() >= 2) {
      Claim c = make_claim(ClaimType::Route, ctx_.name);
      c.route = rooms;
      text += "I went " + rooms.front() + " and ended in " + rooms.back() + ". " + to_dsl(c);
    } else if (rooms.size() == 1) {
      Claim c = make_claim(ClaimType::Location, ctx_.name);
      c.room = rooms.front();
      text += "I stayed in " + rooms.front() + ". " + to_dsl(c);
    }
    if (const auto tr = last_task_room(mem)) {
      Claim c = make_claim(ClaimType::Activity, ctx_.name);
      c.activity = ActivityKind::Task;
      c.room = *tr;
      text += " I worked on a task in " + *tr + ". " + to_dsl(c);
    }
    const auto& mv = *s.meeting;
    if (mv.reason == "report" && mv.caller == ctx_.name && s.room) {
      Claim c = make_claim(ClaimType::Location, ctx_.name);
      c.room = *s.room;
      c.temporal = "when I found the body";
      text += " The body was in " + *s.room + ". " + to_dsl(c);
    }
    if (text.empty()) text = "I have nothing to report.";
    return text;
  }

  std::string sightings(const StructuredSummary& s, const AgentMemory& mem) const {
    std::string text;
    for (const auto& [who, room] : recent_sightings(mem, s.meeting->known_dead, 2)) {
      Claim c = make_claim(ClaimType::Sighting, ctx_.name);
      c.target = who;
      c.room = room;
      if (!text.empty()) text += " ";
      text += "I saw " + who + " in " + room + ". " + to_dsl(c);
    }
    return text;
  }

  std::string accusation(const std::string& target, Confidence conf) const {
    Claim c;
    c.type = ClaimType::Accusation;
    c.subject = ctx_.name;
    c.target = target;
    c.confidence = conf;
    return "I think " + target + " is the duck. " + to_dsl(c);
  }

  // Structured claims already on the table this meeting.
  std::vector<Claim> transcript_claims(const MeetingView& mv) const {
    std::vector<Claim> out;
    ClaimContext cc;
    cc.map = ctx_.map;
    cc.players = ctx_.players;
    for (const auto& l : mv.transcript) {
      cc.speaker = l.speaker;
      try {
        auto cs = extract_structured(l.text, cc);
        out.insert(out.end(), cs.begin(), cs.end());
      } catch (const Error&) {
      }
    }
    return out;
  }

  // Accusation counts by target, ignoring `exclude_accuser`.
  std::map<std::string, int> accusation_counts(const MeetingView& mv, const std::string& exclude_accuser) const {
    std::map<std::string, int> n;
    for (const auto& c : transcript_claims(mv)) {
      if (c.type == ClaimType::Accusation && c.target && c.subject != exclude_accuser) ++n[*c.target];
    }
    return n;
  }

  static std::optional<std::string> unique_top(const std::map<std::string, int>& counts,
                                               const std::function<bool(const std::string&)>& allowed) {
    std::optional<std::string> best;
    int top = 0;
    bool tie = false;
    for (const auto& [who, n] : counts) {
      if (!allowed(who)) continue;
      if (n > top) {
        best = who;
        top = n;
        tie = false;
      } else if (n == top) {
        tie = true;
      }
    }
    if (tie) return std::nullopt;
    return best;
  }

  bool living(const MeetingView& mv, const std::string& who) const {
    return std::find(mv.known_dead.begin(), mv.known_dead.end(), who) == mv.known_dead.end() &&
           std::find(ctx_.players.begin(), ctx_.players.end(), who) != ctx_.players.end();
  }

  Action step_toward(RoomIndex here, RoomIndex goal, std::span<const Action> legal) const {
    const auto plan = map().shortest_travel(here, goal);
    if (plan.path.size() >= 2) {
      const auto mv = Action::move(plan.path[1]);
      if (has(legal, mv)) return mv;
    }
    return Action::wait();
  }

  Action wander(std::span<const Action> legal, double stay = 0.3) {
    std::vector<Action> moves;
    for (const auto& a : legal) {
      if (a.kind == ActionKind::Move) moves.push_back(a);
    }
    if (moves.empty() || rng_.unit() < stay) return Action::wait();
    return moves[rng_.below(moves.size())];
  }

  // Nearest incomplete task room; do_task when standing in one.
  std::optional<Action> task_step(const StructuredSummary& s, std::span<const Action> legal) const {
    if (!s.room) return std::nullopt;
    if (auto t = find_kind(legal, ActionKind::DoTask)) return t;
    const auto here = map().at(*s.room);
    std::optional<RoomIndex> goal;
    int best = 0;
    for (const auto& t : s.tasks) {
      if (t.done) continue;
      const auto r = map().at(t.room);
      const int d = map().distance(here, r);
      if (!goal || d < best) {
        goal = r;
        best = d;
      }
    }
    if (!goal) return std::nullopt;
    return step_toward(here, *goal, legal);
  }

  SeatContext ctx_;
  Rng rng_;
};

// -- random_walker ----------------------------------------------------------------

class RandomWalker : public ScriptedPolicy {
 public:
  using ScriptedPolicy::ScriptedPolicy;
  std::string label() const override { return "random_walker"; }

  Action act(const Observation&, const AgentMemory&, std::span<const Action> legal) override {
    if (auto r = find_kind(legal, ActionKind::Report)) return *r;
    std::vector<Action> pool;
    for (const auto& a : legal) {
      if (a.kind != ActionKind::CallMeeting) pool.push_back(a);
    }
    return pool[rng_.below(pool.size())];
  }

  Utterance speak(const Observation& obs, const AgentMemory& mem) override {
    if (own_lines(*obs.summary.meeting, ctx_.name) == 0) return {whereabouts(obs.summary, mem), {}};
    return {"Nothing to add.", {}};
  }

  VoteChoice vote(const Observation&, const AgentMemory&) override { return {}; }
};

// -- task_goose -------------------------------------------------------------------

class TaskGoose : public ScriptedPolicy {
 public:
  using ScriptedPolicy::ScriptedPolicy;
  std::string label() const override { return "task_goose"; }

  Action act(const Observation& obs, const AgentMemory&, std::span<const Action> legal) override {
    if (auto r = find_kind(legal, ActionKind::Report)) return *r;
    if (auto t = task_step(obs.summary, legal)) return *t;
    return wander(legal);
  }

  Utterance speak(const Observation& obs, const AgentMemory& mem) override {
    const auto& s = obs.summary;
    if (own_lines(*s.meeting, ctx_.name) == 0) return {whereabouts(s, mem), {}};
    std::string text = sightings(s, mem);
    if (const auto who = suspect(s, mem)) {
      if (!text.empty()) text += " ";
      text += accusation(*who, Confidence::Strong);
    }
    if (text.empty()) text = "I did not see anything useful.";
    return {text, {}};
  }

  VoteChoice vote(const Observation& obs, const AgentMemory& mem) override {
    const auto& s = obs.summary;
    if (auto who = suspect(s, mem)) return {who, {}};
    return {follow_crowd(*s.meeting), {}};
  }

 protected:
  // A player seen beside a body, else the last company of a victim.
  std::optional<std::string> suspect(const StructuredSummary& s, const AgentMemory& mem) const {
    const auto& mv = *s.meeting;
    const int seg = mem.segment();
    auto ok = [&](const std::string& p) { return p != ctx_.name && living(mv, p) && !excluded(p); };
    for (auto it = mem.encounters.rbegin(); it != mem.encounters.rend(); ++it) {
      if (it->segment != seg) break;
      if (it->bodies.empty()) continue;
      for (const auto& p : it->players) {
        if (ok(p)) return p;
      }
    }
    for (const auto& v : mv.victims) {
      for (auto it = mem.encounters.rbegin(); it != mem.encounters.rend(); ++it) {
        if (it->segment != seg) break;
        if (std::find(it->players.begin(), it->players.end(), v) == it->players.end()) continue;
        std::vector<std::string> others;
        for (const auto& p : it->players) {
          if (p != v && ok(p)) others.push_back(p);
        }
        if (others.size() == 1) return others.front();
        break;
      }
    }
    return std::nullopt;
  }

  std::optional<std::string> follow_crowd(const MeetingView& mv) const {
    const auto counts = accusation_counts(mv, ctx_.name);
    return unique_top(counts, [&](const std::string& p) { return p != ctx_.name && living(mv, p) && !excluded(p); });
  }

  virtual bool excluded(const std::string&) const { return false; }
};

// -- buddy_goose ------------------------------------------------------------------

class BuddyGoose : public TaskGoose {
 public:
  using TaskGoose::TaskGoose;
  std::string label() const override { return "buddy_goose"; }

  Action act(const Observation& obs, const AgentMemory& mem, std::span<const Action> legal) override {
    const auto& s = obs.summary;
    if (auto r = find_kind(legal, ActionKind::Report)) return *r;
    if (!buddy_ && !s.players_here.empty()) buddy_ = s.players_here.front();
    if (buddy_) {
      for (const auto& m : s.moves) {
        if (m.player == *buddy_ && m.departed) {
          if (const auto to = map().find(m.other)) {
            const auto mv = Action::move(*to);
            if (has(legal, mv)) return mv;
          }
        }
      }
      const bool together = std::find(s.players_here.begin(), s.players_here.end(), *buddy_) != s.players_here.end();
      if (together) {
        if (auto t = find_kind(legal, ActionKind::DoTask)) return *t;
      }
    }
    return TaskGoose::act(obs, mem, legal);
  }

  Utterance speak(const Observation& obs, const AgentMemory& mem) override {
    auto u = TaskGoose::speak(obs, mem);
    const auto& mv = *obs.summary.meeting;
    if (own_lines(mv, ctx_.name) == 1 && buddy_ && living(mv, *buddy_)) {
      Claim c;
      c.type = ClaimType::Defense;
      c.subject = ctx_.name;
      c.target = *buddy_;
      c.basis = "we moved together";
      u.text += " " + *buddy_ + " was with me, I trust them. " + to_dsl(c);
    }
    return u;
  }

 protected:
  bool excluded(const std::string& p) const override { return buddy_ && p == *buddy_; }

 private:
  std::optional<std::string> buddy_;
};

// -- stalker_duck -----------------------------------------------------------------

class StalkerDuck : public ScriptedPolicy {
 public:
  using ScriptedPolicy::ScriptedPolicy;
  std::string label() const override { return "stalker_duck"; }

  Action act(const Observation& obs, const AgentMemory& mem, std::span<const Action> legal) override {
    const auto& s = obs.summary;
    if (!s.room) return Action::wait();
    std::vector<std::string> geese;
    for (const auto& p : s.players_here) {
      if (std::find(s.teammates.begin(), s.teammates.end(), p) == s.teammates.end()) geese.push_back(p);
    }
    if (geese.size() == 1) {
      for (const auto& a : legal) {
        if (a.kind == ActionKind::Kill && ctx_.players.at(idx(*a.target)) == geese.front()) return a;
      }
    }
    // Leave the scene of a kill, and never stand beside a body.
    const bool just_killed = !mem.actions.empty() && mem.actions.back().action.rfind("kill(", 0) == 0;
    if (just_killed || !s.bodies_here.empty()) {
      const auto a = wander(legal, 0.0);
      if (a.kind == ActionKind::Move) return a;
    }
    if (s.kill_cooldown.value_or(1) == 0) {
      for (const auto& m : s.moves) {
        const bool mate = std::find(s.teammates.begin(), s.teammates.end(), m.player) != s.teammates.end();
        if (!m.departed || mate) continue;
        if (const auto to = map().find(m.other)) {
          const auto mv = Action::move(*to);
          if (has(legal, mv)) return mv;
        }
      }
      if (geese.size() >= 2) {
        if (auto t = find_kind(legal, ActionKind::DoTask)) return *t;
        return Action::wait();
      }
      return wander(legal, 0.1);
    }
    if (auto t = task_step(s, legal)) return *t;
    return wander(legal);
  }

  Utterance speak(const Observation& obs, const AgentMemory& mem) override {
    const auto& s = obs.summary;
    const auto& mv = *s.meeting;
    teammates_ = s.teammates;
    if (own_lines(mv, ctx_.name) == 0) return {planted(s, mem), {}};
    std::string text = sightings(s, mem);
    if (const auto who = scapegoat(mv)) {
      if (!text.empty()) text += " ";
      text += accusation(*who, Confidence::Moderate);
    }
    if (text.empty()) text = "I have nothing else.";
    return {text, {}};
  }

  VoteChoice vote(const Observation& obs, const AgentMemory&) override {
    const auto& mv = *obs.summary.meeting;
    teammates_ = obs.summary.teammates;
    const auto counts = accusation_counts(mv, "");
    const auto top = unique_top(counts, [&](const std::string& p) { return goose(mv, p); });
    if (top) return {top, {}};
    if (scapegoat_ && goose(mv, *scapegoat_)) return {scapegoat_, {}};
    return {};
  }

 private:
  bool goose(const MeetingView& mv, const std::string& p) const {
    return p != ctx_.name && living(mv, p) && std::find(teammates_.begin(), teammates_.end(), p) == teammates_.end();
  }

  // The one false claim per meeting: a room never entered this stretch. When
  // only one room was visited the claim becomes a route through a fresh room,
  // so it reads as plainly false rather than as a mix-up with the true room.
  std::string planted(const StructuredSummary& s, const AgentMemory& mem) {
    const auto rooms = segment_rooms(s, mem);
    std::set<std::string> visited(rooms.begin(), rooms.end());
    std::vector<std::string> fresh;
    for (const auto& n : map().names()) {
      if (!visited.count(n)) fresh.push_back(n);
    }
    if (fresh.empty()) return "I was walking around doing tasks.";
    const auto& fake = fresh[rng_.below(fresh.size())];
    Claim c;
    if (rooms.size() == 1) {
      c = make_claim(ClaimType::Route, ctx_.name);
      c.route = {rooms.front(), fake};
      return "I went from " + rooms.front() + " to " + fake + ". " + to_dsl(c);
    }
    c = make_claim(ClaimType::Location, ctx_.name);
    c.room = fake;
    return "I was in " + fake + " doing tasks. " + to_dsl(c);
  }

  std::optional<std::string> scapegoat(const MeetingView& mv) {
    for (const auto& c : transcript_claims(mv)) {
      if (c.type == ClaimType::Accusation && c.target == ctx_.name && goose(mv, c.subject)) {
        scapegoat_ = c.subject;
        return scapegoat_;
      }
    }
    const auto counts = accusation_counts(mv, ctx_.name);
    if (auto top = unique_top(counts, [&](const std::string& p) { return goose(mv, p); })) {
      scapegoat_ = top;
      return scapegoat_;
    }
    std::vector<std::string> pool;
    for (const auto& p : ctx_.players) {
      if (goose(mv, p)) pool.push_back(p);
    }
    if (pool.empty()) return std::nullopt;
    scapegoat_ = pool[rng_.below(pool.size())];
    return scapegoat_;
  }

  std::vector<std::string> teammates_;
  std::optional<std::string> scapegoat_;
};

}  // namespace

std::vector<std::string> scripted_policy_names() {
  return {"random_walker", "task_goose", "buddy_goose", "stalker_duck"};
}

std::unique_ptr<Policy> make_scripted_policy(const std::string& name, const SeatContext& ctx) {
  if (!ctx.map) throw ConfigError("seat context has no map");
  if (name == "random_walker") return std::make_unique<RandomWalker>(ctx);
  if (name == "task_goose") return std::make_unique<TaskGoose>(ctx);
  if (name == "buddy_goose") return std::make_unique<BuddyGoose>(ctx);
  if (name == "stalker_duck") return std::make_unique<StalkerDuck>(ctx);
  throw ConfigError("unknown scripted policy '" + name + "'");
}

}  // namespace quack
