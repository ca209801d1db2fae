#include "quack/engine.hpp"

#include <algorithm>
#include <set>

#include "quack/error.hpp"

namespace quack {

using nlohmann::json;

// -- Pure rules ------------------------------------------------------------------

std::optional<PlayerId> tally_votes(const std::map<PlayerId, Ballot>& votes) {
  std::map<PlayerId, int> counts;
  int skips = 0;
  for (const auto& [voter, b] : votes) {
    if (b.target) {
      ++counts[*b.target];
    } else {
      ++skips;
    }
  }
  std::optional<PlayerId> best;
  int best_count = 0;
  bool tied = false;
  for (const auto& [p, c] : counts) {
    if (c > best_count) {
      best = p;
      best_count = c;
      tied = false;
    } else if (c == best_count) {
      tied = true;
    }
  }
  if (!best || tied || best_count <= skips) return std::nullopt;
  return best;
}

std::optional<PlayerId> tally_votes(const std::map<PlayerId, Ballot>& votes, const GameState& s) {
  const auto living = s.living();
  for (const auto& [voter, b] : votes) {
    if (idx(voter) >= s.agents.size()) throw RuleError("vote by unknown player");
    if (!s.agent(voter).alive) throw RuleError("vote by dead player " + s.agent(voter).name);
    if (b.target) {
      if (idx(*b.target) >= s.agents.size()) throw RuleError("vote for unknown player");
      if (!s.agent(*b.target).alive) throw RuleError("vote for dead player " + s.agent(*b.target).name);
    }
  }
  if (votes.size() != living.size()) throw RuleError("voters must be exactly the living players");
  for (auto p : living) {
    if (!votes.count(p)) throw RuleError("missing vote from " + s.agent(p).name);
  }
  return tally_votes(votes);
}

namespace {

bool all_goose_tasks_done(const GameState& s) {
  int total = 0;
  for (const auto& a : s.agents) {
    if (a.role != Role::Goose) continue;
    for (const auto& t : a.tasks) {
      ++total;
      if (!t.done) return false;
    }
  }
  return total > 0;
}

}  // namespace

std::optional<Outcome> check_win_immediate(const GameState& s) {
  const int ducks = s.living_count(Role::Duck);
  const int geese = s.living_count(Role::Goose);
  if (ducks == 0) return Outcome{Team::Geese, WinReason::AllDucksEjected};
  if (ducks >= geese) return Outcome{Team::Ducks, WinReason::Parity};
  if (all_goose_tasks_done(s)) return Outcome{Team::Geese, WinReason::TasksComplete};
  return std::nullopt;
}

std::optional<Outcome> check_win(const GameState& s, const GameConfig& cfg) {
  if (auto o = check_win_immediate(s)) return o;
  if (s.tick >= cfg.tick_budget && s.living_count(Role::Goose) >= 1) return Outcome{Team::Geese, WinReason::Timeout};
  return std::nullopt;
}

std::vector<Action> legal_actions(const GameState& s, const Map& map, const GameConfig& cfg, PlayerId agent) {
  if (idx(agent) >= s.agents.size()) throw RuleError("unknown agent");
  const auto& a = s.agent(agent);
  if (!a.alive) throw RuleError("agent " + a.name + " is dead");
  if (s.phase != Phase::FreeRoam) throw RuleError("legal actions exist only in free roam");

  std::vector<Action> out{Action::wait()};
  const auto here = room_of(a.location);
  if (!here) return out;

  for (const auto& nb : map.adjacent(*here)) out.push_back(Action::move(nb.room));
  for (const auto& t : a.tasks) {
    if (!t.done && t.room == *here) {
      out.push_back(Action::do_task());
      break;
    }
  }
  if (std::any_of(s.bodies.begin(), s.bodies.end(), [&](const BodyRecord& b) { return b.room == *here; }))
    out.push_back(Action::report());
  if (*here == map.emergency_room() && s.meetings_used < cfg.meeting_budget) out.push_back(Action::call_meeting());
  if (a.is_duck() && a.cooldown == 0) {
    for (auto p : s.occupants(*here)) {
      if (p != agent && s.agent(p).role == Role::Goose) out.push_back(Action::kill(p));
    }
  }
  return out;
}

// -- Game ------------------------------------------------------------------------

Game::Game(const Map& map, GameConfig config, std::vector<std::string> names)
    : map_(&map), config_(config), rng_(config.seed) {
  config_.validate_against(map);
  const auto n = static_cast<std::size_t>(config_.n_agents);
  if (names.empty()) names = default_player_names(n);
  if (names.size() != n) throw ConfigError("need exactly n_agents player names");
  {
    std::set<std::string> seen;
    for (const auto& nm : names) {
      if (nm.empty() || nm == "skip" || map.find(nm)) throw ConfigError("invalid player name '" + nm + "'");
      if (!seen.insert(nm).second) throw ConfigError("duplicate player name '" + nm + "'");
    }
  }

  LogHeader h;
  h.map = map.to_json();
  h.map_hash = map.hash();
  h.config = config_;
  h.players = names;
  log_ = GameLog(std::move(h));

  // Roles: m distinct seats drawn uniformly.
  std::vector<std::size_t> seats(n);
  for (std::size_t i = 0; i < n; ++i) seats[i] = i;
  rng_.shuffle(seats);
  std::vector<Role> roles(n, Role::Goose);
  for (int i = 0; i < config_.n_ducks; ++i) roles[seats[static_cast<std::size_t>(i)]] = Role::Duck;

  // Tasks: k distinct task rooms per agent; Ducks get the same kind of draw.
  std::vector<std::vector<RoomIndex>> tasks(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto pool = map.task_rooms();
    rng_.shuffle(pool);
    pool.resize(static_cast<std::size_t>(config_.tasks_per_goose));
    tasks[i] = pool;
  }

  state_.tick = 0;
  state_.phase = Phase::FreeRoam;
  state_.agents.resize(n);
  json spawn = json::object();
  for (std::size_t i = 0; i < n; ++i) {
    auto& a = state_.agents[i];
    a.id = player_at(i);
    a.name = names[i];
    a.role = roles[i];
    const auto room = static_cast<RoomIndex>(rng_.below(map.room_count()));
    a.location = room;
    a.visit(room);
    spawn[a.name] = map.name(room);
  }
  emit(EventKind::GameStart, {{"players", names}, {"spawn", spawn}});
  for (std::size_t i = 0; i < n; ++i) {
    auto& a = state_.agents[i];
    if (a.is_duck()) a.cooldown = config_.kill_cooldown;
    emit(EventKind::RoleAssigned, {{"player", a.name}, {"role", to_string(a.role)}});
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto& a = state_.agents[i];
    for (std::size_t t = 0; t < tasks[i].size(); ++t) {
      a.tasks.push_back({tasks[i][t], 0, false});
      emit(EventKind::TaskAssigned,
           {{"player", a.name}, {"task", t}, {"room", map.name(tasks[i][t])}, {"fake", a.is_duck()}});
    }
  }
}

void Game::emit(EventKind kind, json payload) {
  Event e{log_.next_seq(), state_.tick, kind, std::move(payload)};
  if (sink_) sink_->push_back(e);
  log_.append(std::move(e));
}

void Game::finish(Outcome o) {
  state_.phase = Phase::GameOver;
  state_.outcome = o;
  state_.meeting.reset();
  emit(EventKind::GameOver, {{"winner", to_string(o.winner)},
                             {"reason", to_string(o.reason)},
                             {"digest", state_digest(state_, *map_)}});
}

bool Game::settle() {
  if (over()) return true;
  if (auto o = check_win_immediate(state_)) {
    finish(*o);
    return true;
  }
  return false;
}

std::vector<Event> Game::step_free_roam(DecisionSource& src) {
  if (state_.phase != Phase::FreeRoam) throw RuleError("step_free_roam outside free roam");
  std::vector<Event> emitted;
  sink_ = &emitted;

  ++state_.tick;
  state_.buffers.clear();

  // (1) Advance transits. Each arrival is committed at its own Arrived
  // event, in seat order; occupants at that moment witness it.
  for (auto& a : state_.agents) {
    if (!a.alive) continue;
    auto* t = std::get_if<Transit>(&a.location);
    if (!t) continue;
    --t->remaining;
    if (t->remaining > 0) {
      emit(EventKind::MoveProgressed, {{"player", a.name},
                                       {"from", map_->name(t->from)},
                                       {"to", map_->name(t->to)},
                                       {"remaining", t->remaining}});
      continue;
    }
    const auto tr = *t;
    std::vector<PlayerId> witnesses;
    json wnames = json::array();
    for (auto q : state_.occupants(tr.to)) {
      witnesses.push_back(q);
      wnames.push_back(state_.agent(q).name);
    }
    a.location = tr.to;
    a.visit(tr.to);
    state_.buffers.moves.push_back({a.id, tr.to, tr.from, MoveDirection::Arrived, witnesses});
    emit(EventKind::Arrived,
         {{"player", a.name}, {"from", map_->name(tr.from)}, {"to", map_->name(tr.to)}, {"witnesses", wnames}});
  }

  // (2) Duck cooldowns.
  for (auto& a : state_.agents) {
    if (a.alive && a.is_duck() && a.cooldown > 0) {
      --a.cooldown;
      emit(EventKind::CooldownTick, {{"player", a.name}, {"remaining", a.cooldown}});
    }
  }

  // (3) Query living agents in a seeded random order; apply immediately.
  auto order = state_.living();
  rng_.shuffle(order);
  for (auto p : order) {
    if (!state_.agent(p).alive) continue;
    if (state_.phase != Phase::FreeRoam) break;
    const auto legal = legal_actions(p);
    Action chosen = src.choose_action(state_, p, legal);
    const bool ok = std::any_of(legal.begin(), legal.end(), [&](const Action& l) { return l.same_choice(chosen); });
    if (!ok) {
      auto say = chosen.say;
      chosen = Action::wait();
      chosen.say = say;
      chosen.note = "illegal_action_rejected";
    }
    apply_action(p, std::move(chosen));
    if (auto o = check_win_immediate(state_)) {
      finish(*o);
      break;
    }
  }

  // (4) Timeout.
  if (state_.phase == Phase::FreeRoam) {
    if (auto o = check_win(state_, config_)) finish(*o);
  }
  sink_ = nullptr;
  return emitted;
}

void Game::apply_action(PlayerId p, Action a) {
  auto& ag = state_.agent(p);
  const auto here = room_of(ag.location);
  auto with_note = [&](json payload) {
    if (!a.note.empty()) payload["note"] = a.note;
    return payload;
  };

  if (a.say && !a.say->empty()) {
    if (here) {
      state_.buffers.chat.push_back({p, *here, *a.say});
      emit(EventKind::Said, {{"player", ag.name}, {"room", map_->name(*here)}, {"text", *a.say}});
    } else if (a.note.empty()) {
      a.note = "say_dropped_in_transit";
    }
  }

  switch (a.kind) {
    case ActionKind::Wait: {
      ag.reset_partial_progress();
      emit(EventKind::Waited,
           with_note({{"player", ag.name}, {"room", here ? json(map_->name(*here)) : json(nullptr)}}));
      break;
    }
    case ActionKind::Move: {
      const auto to = *a.room;
      const int w = *map_->weight(*here, to);
      std::vector<PlayerId> witnesses;
      json wnames = json::array();
      for (auto q : state_.occupants(*here)) {
        if (q == p) continue;
        witnesses.push_back(q);
        wnames.push_back(state_.agent(q).name);
      }
      ag.location = Transit{*here, to, w};
      ag.reset_partial_progress();
      state_.buffers.moves.push_back({p, *here, to, MoveDirection::Departed, witnesses});
      emit(EventKind::MoveStarted, with_note({{"player", ag.name},
                                              {"from", map_->name(*here)},
                                              {"to", map_->name(to)},
                                              {"weight", w},
                                              {"witnesses", wnames}}));
      break;
    }
    case ActionKind::DoTask: {
      std::size_t ti = 0;
      while (ti < ag.tasks.size() && (ag.tasks[ti].done || ag.tasks[ti].room != *here)) ++ti;
      for (std::size_t j = 0; j < ag.tasks.size(); ++j) {
        if (j != ti && !ag.tasks[j].done) ag.tasks[j].progress = 0;
      }
      auto& task = ag.tasks.at(ti);
      ++task.progress;
      emit(EventKind::TaskProgressed, with_note({{"player", ag.name},
                                                 {"task", ti},
                                                 {"room", map_->name(*here)},
                                                 {"progress", task.progress}}));
      if (task.progress >= config_.task_duration) {
        task.done = true;
        emit(EventKind::TaskCompleted, {{"player", ag.name}, {"task", ti}, {"room", map_->name(*here)}});
      }
      break;
    }
    case ActionKind::Report: {
      ag.reset_partial_progress();
      MeetingTrigger trig{TriggerKind::BodyReport, p, {}};
      json victims = json::array();
      for (const auto& b : state_.bodies) {
        if (b.room == *here) {
          trig.victims.push_back(b.victim);
          victims.push_back(state_.agent(b.victim).name);
        }
      }
      emit(EventKind::BodyReported, with_note({{"player", ag.name}, {"room", map_->name(*here)}, {"victims", victims}}));
      start_meeting(std::move(trig));
      break;
    }
    case ActionKind::CallMeeting: {
      ag.reset_partial_progress();
      ++state_.meetings_used;
      emit(EventKind::MeetingCalled, with_note({{"player", ag.name},
                                                {"room", map_->name(*here)},
                                                {"meetings_used", state_.meetings_used}}));
      start_meeting({TriggerKind::Emergency, p, {}});
      break;
    }
    case ActionKind::Kill: {
      auto& victim = state_.agent(*a.target);
      victim.alive = false;
      state_.bodies.push_back({victim.id, *here, state_.tick});
      ag.cooldown = config_.kill_cooldown;
      ag.reset_partial_progress();
      emit(EventKind::Killed,
           with_note({{"killer", ag.name}, {"victim", victim.name}, {"room", map_->name(*here)}}));
      break;
    }
  }
}

void Game::start_meeting(MeetingTrigger trigger) {
  MeetingRecord m;
  m.index = state_.meetings_held++;
  m.tick = state_.tick;
  m.trigger_seq = log_.next_seq() - 1;
  m.trigger = std::move(trigger);
  state_.meeting = std::move(m);

  json cancelled = json::array();
  for (auto& a : state_.agents) {
    if (!a.alive) continue;
    if (const auto* t = std::get_if<Transit>(&a.location)) {
      cancelled.push_back(a.name);
      a.location = t->from;
    }
  }
  state_.phase = Phase::Discussion;
  emit(EventKind::PhaseChanged,
       {{"from", to_string(Phase::FreeRoam)}, {"to", to_string(Phase::Discussion)}, {"cancelled", cancelled}});
}

MeetingRecord Game::run_meeting(DecisionSource& src) {
  if (state_.phase != Phase::Discussion || !state_.meeting) throw RuleError("run_meeting outside discussion");
  auto& m = *state_.meeting;

  // Speaking order: trigger agent first, the rest shuffled.
  std::vector<PlayerId> rest;
  for (auto p : state_.living()) {
    if (p != m.trigger.caller) rest.push_back(p);
  }
  rng_.shuffle(rest);
  m.speaking_order.clear();
  m.speaking_order.push_back(m.trigger.caller);
  m.speaking_order.insert(m.speaking_order.end(), rest.begin(), rest.end());
  {
    json order = json::array();
    for (auto p : m.speaking_order) order.push_back(state_.agent(p).name);
    emit(EventKind::SpeakingOrderFixed,
         {{"meeting", m.index},
          {"trigger", m.trigger.kind == TriggerKind::BodyReport ? "report" : "emergency"},
          {"caller", state_.agent(m.trigger.caller).name},
          {"order", order}});
  }

  for (int round = 1; round <= config_.discussion_rounds; ++round) {
    for (auto p : m.speaking_order) {
      auto speech = src.speak(state_, p);
      state_.meeting->transcript.push_back({p, round, speech.text});
      json payload{{"meeting", m.index}, {"speaker", state_.agent(p).name}, {"round", round}, {"text", speech.text}};
      if (!speech.note.empty()) payload["note"] = speech.note;
      emit(EventKind::Utterance, std::move(payload));
    }
  }

  state_.phase = Phase::Voting;
  emit(EventKind::PhaseChanged,
       {{"from", to_string(Phase::Discussion)}, {"to", to_string(Phase::Voting)}, {"cancelled", json::array()}});

  // Simultaneous ballots: collect all, then reveal.
  std::map<PlayerId, Ballot> ballots;
  for (auto p : state_.living()) {
    Ballot b = src.vote(state_, p);
    if (b.target && (idx(*b.target) >= state_.agents.size() || !state_.agent(*b.target).alive)) {
      b.target.reset();
      b.note = "invalid_vote_target";
    }
    ballots[p] = std::move(b);
  }
  for (const auto& [p, b] : ballots) {
    json payload{{"meeting", m.index},
                 {"voter", state_.agent(p).name},
                 {"target", b.target ? json(state_.agent(*b.target).name) : json(nullptr)}};
    if (!b.note.empty()) payload["note"] = b.note;
    emit(EventKind::VoteCast, std::move(payload));
  }
  m.votes = ballots;

  const auto ejected = tally_votes(ballots, state_);
  state_.phase = Phase::Ejection;
  emit(EventKind::PhaseChanged,
       {{"from", to_string(Phase::Voting)}, {"to", to_string(Phase::Ejection)}, {"cancelled", json::array()}});
  m.decided = true;
  m.ejected = ejected;
  if (ejected) {
    state_.agent(*ejected).alive = false;
    emit(EventKind::Ejected, {{"meeting", m.index}, {"player", state_.agent(*ejected).name}});
  } else {
    emit(EventKind::NoEjection, {{"meeting", m.index}});
  }

  for (auto p : state_.living()) src.observe(state_, p);

  MeetingRecord record = *state_.meeting;
  meetings_.push_back(record);

  if (auto o = check_win(state_, config_)) {
    finish(*o);
    return record;
  }

  // Respawn survivors uniformly over rooms; bodies are cleared.
  json positions = json::object();
  for (auto p : state_.living()) {
    auto& a = state_.agent(p);
    const auto r = static_cast<RoomIndex>(rng_.below(map_->room_count()));
    a.location = r;
    a.visit(r);
    a.reset_partial_progress();
    positions[a.name] = map_->name(r);
  }
  state_.bodies.clear();
  emit(EventKind::Respawned, {{"positions", positions}});
  state_.meeting.reset();
  state_.phase = Phase::FreeRoam;
  emit(EventKind::PhaseChanged,
       {{"from", to_string(Phase::Ejection)}, {"to", to_string(Phase::FreeRoam)}, {"cancelled", json::array()}});
  return record;
}

const GameLog& Game::run(DecisionSource& src, const TickHook& on_tick_end) {
  settle();
  if (on_tick_end) on_tick_end(state_);
  while (!over()) {
    step_free_roam(src);
    if (state_.phase == Phase::Discussion) run_meeting(src);
    if (on_tick_end) on_tick_end(state_);
  }
  return log_;
}

GameLog run_game(const Map& map, const GameConfig& config, DecisionSource& src, const TickHook& on_tick_end) {
  Game g(map, config);
  g.run(src, on_tick_end);
  return g.log();
}

}  // namespace quack
