#include "quack/replay.hpp"

#include <algorithm>
#include <set>

#include "quack/engine.hpp"
#include "quack/error.hpp"

namespace quack {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const Event& e, const std::string& what) {
  throw ReplayError(e.seq, std::string(to_string(e.kind)) + ": " + what);
}

}  // namespace

Replayer::Replayer(const Map& map, const LogHeader& header)
    : map_(&map), config_(header.config), players_(header.players) {
  if (map.hash() != header.map_hash) throw ReplayError(0, "map hash mismatch");
  config_.validate_against(map);
  if (players_.size() != static_cast<std::size_t>(config_.n_agents))
    throw ReplayError(0, "header lists " + std::to_string(players_.size()) + " players for n_agents " +
                             std::to_string(config_.n_agents));
}

PlayerId Replayer::player(const Event& e, const char* key) const {
  const auto& v = e.payload.at(key);
  if (!v.is_string()) fail(e, std::string(key) + " must be a player name");
  auto it = std::find(players_.begin(), players_.end(), v.get<std::string>());
  if (it == players_.end()) fail(e, "unknown player '" + v.get<std::string>() + "'");
  return player_at(static_cast<std::size_t>(it - players_.begin()));
}

RoomIndex Replayer::room(const Event& e, const char* key) const {
  const auto& v = e.payload.at(key);
  if (!v.is_string()) fail(e, std::string(key) + " must be a room name");
  const auto& names = map_->names();
  auto it = std::find(names.begin(), names.end(), v.get<std::string>());
  if (it == names.end()) fail(e, "unknown room '" + v.get<std::string>() + "'");
  return static_cast<RoomIndex>(it - names.begin());
}

std::vector<PlayerId> Replayer::player_list(const Event& e, const char* key) const {
  const auto& v = e.payload.at(key);
  if (!v.is_array()) fail(e, std::string(key) + " must be a list");
  std::vector<PlayerId> out;
  for (const auto& x : v) {
    Event tmp{e.seq, e.tick, e.kind, json{{"p", x}}};
    out.push_back(player(tmp, "p"));
  }
  return out;
}

std::vector<PlayerId> Replayer::witnesses_in(RoomIndex r, PlayerId except) const {
  std::vector<PlayerId> out;
  for (auto q : state_.occupants(r)) {
    if (q != except) out.push_back(q);
  }
  return out;
}

void Replayer::expect_phase(const Event& e, Phase p) const {
  if (state_.phase != p)
    fail(e, "expected phase " + std::string(to_string(p)) + ", state is in " + std::string(to_string(state_.phase)));
}

void Replayer::begin_tick(const Event& e) {
  if (e.tick != state_.tick + 1) fail(e, "tick jumped from " + std::to_string(state_.tick));
  expect_phase(e, Phase::FreeRoam);
  if (!prelude_.empty()) fail(e, "previous tick is missing transit or cooldown events");
  ++state_.tick;
  state_.buffers.clear();
  acted_.assign(state_.agents.size(), false);

  // Transits advance deterministically; the log must report each one.
  // Arrivals are committed when their Arrived event is applied.
  for (auto& a : state_.agents) {
    if (!a.alive) continue;
    if (auto* t = std::get_if<Transit>(&a.location)) {
      --t->remaining;
      prelude_.emplace_back(t->remaining > 0 ? EventKind::MoveProgressed : EventKind::Arrived, a.id);
    }
  }
  for (const auto& a : state_.agents) {
    if (a.alive && a.is_duck() && a.cooldown > 0) prelude_.emplace_back(EventKind::CooldownTick, a.id);
  }
}

void Replayer::apply_prelude(const Event& e) {
  if (prelude_.empty() || prelude_.front().first != e.kind) fail(e, "unexpected transit or cooldown event");
  const auto p = prelude_.front().second;
  if (player(e, "player") != p) fail(e, "out of order for " + state_.agent(p).name);
  prelude_.erase(prelude_.begin());
  auto& a = state_.agent(p);

  switch (e.kind) {
    case EventKind::MoveProgressed: {
      const auto& t = std::get<Transit>(a.location);
      if (room(e, "from") != t.from || room(e, "to") != t.to || e.num("remaining") != t.remaining)
        fail(e, "transit does not match state");
      break;
    }
    case EventKind::Arrived: {
      const auto t = std::get<Transit>(a.location);
      const auto to = room(e, "to");
      const auto from = room(e, "from");
      if (to != t.to || from != t.from) fail(e, "arrival does not match transit");
      const auto w = witnesses_in(to, p);
      if (player_list(e, "witnesses") != w) fail(e, "witness list does not match room occupants");
      a.location = to;
      a.visit(to);
      state_.buffers.moves.push_back({p, to, from, MoveDirection::Arrived, w});
      break;
    }
    case EventKind::CooldownTick: {
      --a.cooldown;
      if (e.num("remaining") != a.cooldown) fail(e, "cooldown does not match state");
      break;
    }
    default:
      fail(e, "not a prelude event");
  }
}

void Replayer::apply_action(const Event& e) {
  expect_phase(e, Phase::FreeRoam);
  if (!prelude_.empty()) fail(e, "action before transit and cooldown events");
  if (e.tick == 0) fail(e, "no actions at tick 0");
  const auto p = player(e, e.kind == EventKind::Killed ? "killer" : "player");
  auto& a = state_.agent(p);
  if (!a.alive) fail(e, a.name + " is dead");

  if (e.kind == EventKind::Said) {
    const auto here = room_of(a.location);
    if (!here || *here != room(e, "room")) fail(e, "speaker is not in that room");
    if (acted_[idx(p)]) fail(e, a.name + " already acted this tick");
    state_.buffers.chat.push_back({p, *here, e.str("text")});
    return;
  }
  if (e.kind == EventKind::TaskCompleted) {
    const auto ti = static_cast<std::size_t>(e.num("task"));
    if (ti >= a.tasks.size() || a.tasks[ti].done || a.tasks[ti].progress < config_.task_duration)
      fail(e, "task is not ready to complete");
    if (map_->name(a.tasks[ti].room) != e.str("room")) fail(e, "task room mismatch");
    a.tasks[ti].done = true;
    return;
  }

  if (acted_[idx(p)]) fail(e, a.name + " already acted this tick");
  acted_[idx(p)] = true;

  // Legality against the rebuilt state.
  const auto legal = legal_actions(state_, *map_, config_, p);
  auto require = [&](const Action& want) {
    if (std::none_of(legal.begin(), legal.end(), [&](const Action& l) { return l.same_choice(want); }))
      fail(e, "illegal action " + format_action(want, *map_, state_) + " for " + a.name);
  };
  const auto here = room_of(a.location);

  switch (e.kind) {
    case EventKind::Waited: {
      const auto& r = e.payload.at("room");
      if (r.is_null() != !here || (here && room(e, "room") != *here)) fail(e, "room does not match state");
      a.reset_partial_progress();
      break;
    }
    case EventKind::MoveStarted: {
      const auto from = room(e, "from");
      const auto to = room(e, "to");
      if (!here || *here != from) fail(e, "mover is not in the origin room");
      require(Action::move(to));
      const int w = *map_->weight(from, to);
      if (e.num("weight") != w) fail(e, "corridor weight mismatch");
      const auto wit = witnesses_in(from, p);
      if (player_list(e, "witnesses") != wit) fail(e, "witness list does not match room occupants");
      a.location = Transit{from, to, w};
      a.reset_partial_progress();
      state_.buffers.moves.push_back({p, from, to, MoveDirection::Departed, wit});
      break;
    }
    case EventKind::TaskProgressed: {
      require(Action::do_task());
      std::size_t ti = 0;
      while (ti < a.tasks.size() && (a.tasks[ti].done || a.tasks[ti].room != *here)) ++ti;
      if (static_cast<std::size_t>(e.num("task")) != ti || room(e, "room") != *here) fail(e, "task mismatch");
      for (std::size_t j = 0; j < a.tasks.size(); ++j) {
        if (j != ti && !a.tasks[j].done) a.tasks[j].progress = 0;
      }
      ++a.tasks[ti].progress;
      if (e.num("progress") != a.tasks[ti].progress) fail(e, "progress does not match state");
      break;
    }
    case EventKind::Killed: {
      const auto v = player(e, "victim");
      require(Action::kill(v));
      if (room(e, "room") != *here) fail(e, "kill room mismatch");
      auto& victim = state_.agent(v);
      victim.alive = false;
      state_.bodies.push_back({v, *here, state_.tick});
      a.cooldown = config_.kill_cooldown;
      a.reset_partial_progress();
      break;
    }
    case EventKind::BodyReported: {
      require(Action::report());
      if (room(e, "room") != *here) fail(e, "report room mismatch");
      MeetingTrigger trig{TriggerKind::BodyReport, p, {}};
      for (const auto& b : state_.bodies) {
        if (b.room == *here) trig.victims.push_back(b.victim);
      }
      if (player_list(e, "victims") != trig.victims) fail(e, "victim list does not match bodies");
      a.reset_partial_progress();
      pending_trigger_ = std::move(trig);
      pending_trigger_seq_ = e.seq;
      break;
    }
    case EventKind::MeetingCalled: {
      require(Action::call_meeting());
      if (room(e, "room") != *here) fail(e, "meeting room mismatch");
      a.reset_partial_progress();
      ++state_.meetings_used;
      if (e.num("meetings_used") != state_.meetings_used) fail(e, "meeting count mismatch");
      pending_trigger_ = MeetingTrigger{TriggerKind::Emergency, p, {}};
      pending_trigger_seq_ = e.seq;
      break;
    }
    default:
      fail(e, "not an action");
  }
}

void Replayer::apply_meeting(const Event& e) {
  switch (e.kind) {
    case EventKind::PhaseChanged: {
      const auto from = phase_from(e.str("from"));
      const auto to = phase_from(e.str("to"));
      expect_phase(e, from);
      const auto cancelled = player_list(e, "cancelled");
      if (from == Phase::FreeRoam && to == Phase::Discussion) {
        if (!pending_trigger_ || pending_trigger_seq_ + 1 != e.seq) fail(e, "discussion without a trigger");
        MeetingRecord m;
        m.index = state_.meetings_held++;
        m.tick = state_.tick;
        m.trigger_seq = pending_trigger_seq_;
        m.trigger = std::move(*pending_trigger_);
        pending_trigger_.reset();
        state_.meeting = std::move(m);
        std::vector<PlayerId> expect;
        for (auto& a : state_.agents) {
          if (!a.alive) continue;
          if (const auto* t = std::get_if<Transit>(&a.location)) {
            expect.push_back(a.id);
            a.location = t->from;
          }
        }
        if (cancelled != expect) fail(e, "cancelled moves do not match agents in transit");
        next_utterance_ = 0;
      } else if (!cancelled.empty()) {
        fail(e, "only the start of discussion cancels moves");
      } else if (from == Phase::Discussion && to == Phase::Voting) {
        const auto& m = *state_.meeting;
        if (m.speaking_order.empty() ||
            m.transcript.size() != m.speaking_order.size() * static_cast<std::size_t>(config_.discussion_rounds))
          fail(e, "discussion ended early");
      } else if (from == Phase::Voting && to == Phase::Ejection) {
        if (state_.meeting->votes.size() != state_.living().size()) fail(e, "missing votes");
      } else if (from == Phase::Ejection && to == Phase::FreeRoam) {
        if (!state_.meeting->decided) fail(e, "meeting not decided");
        state_.meeting.reset();
      } else {
        fail(e, "invalid phase transition");
      }
      state_.phase = to;
      return;
    }
    case EventKind::SpeakingOrderFixed: {
      expect_phase(e, Phase::Discussion);
      auto& m = *state_.meeting;
      if (!m.speaking_order.empty()) fail(e, "speaking order already fixed");
      if (e.num("meeting") != m.index) fail(e, "meeting index mismatch");
      if (player(e, "caller") != m.trigger.caller) fail(e, "caller mismatch");
      const auto order = player_list(e, "order");
      auto sorted = order;
      std::sort(sorted.begin(), sorted.end());
      if (order.empty() || order.front() != m.trigger.caller || sorted != state_.living())
        fail(e, "order must be the caller followed by the other living players");
      m.speaking_order = order;
      return;
    }
    case EventKind::Utterance: {
      expect_phase(e, Phase::Discussion);
      auto& m = *state_.meeting;
      if (m.speaking_order.empty()) fail(e, "speaking order not fixed");
      const auto n = m.speaking_order.size();
      const auto k = m.transcript.size();
      const int round = static_cast<int>(k / n) + 1;
      if (round > config_.discussion_rounds) fail(e, "too many utterances");
      if (player(e, "speaker") != m.speaking_order[k % n] || e.num("round") != round)
        fail(e, "utterance out of speaking order");
      m.transcript.push_back({m.speaking_order[k % n], round, e.str("text")});
      return;
    }
    case EventKind::VoteCast: {
      expect_phase(e, Phase::Voting);
      auto& m = *state_.meeting;
      const auto voter = player(e, "voter");
      if (!state_.agent(voter).alive) fail(e, "dead voter");
      if (m.votes.count(voter)) fail(e, "duplicate vote");
      if (!m.votes.empty() && m.votes.rbegin()->first > voter) fail(e, "votes out of player order");
      Ballot b;
      if (!e.payload.at("target").is_null()) {
        b.target = player(e, "target");
        if (!state_.agent(*b.target).alive) fail(e, "vote for a dead player");
      }
      if (e.payload.contains("note")) b.note = e.str("note");
      m.votes[voter] = b;
      return;
    }
    case EventKind::Ejected:
    case EventKind::NoEjection: {
      expect_phase(e, Phase::Ejection);
      auto& m = *state_.meeting;
      if (m.decided) fail(e, "meeting already decided");
      const auto result = tally_votes(m.votes, state_);
      std::optional<PlayerId> logged;
      if (e.kind == EventKind::Ejected) logged = player(e, "player");
      if (logged != result) fail(e, "ejection does not match the vote tally");
      m.decided = true;
      m.ejected = result;
      if (result) state_.agent(*result).alive = false;
      return;
    }
    case EventKind::Respawned: {
      expect_phase(e, Phase::Ejection);
      if (!state_.meeting->decided) fail(e, "respawn before the meeting was decided");
      if (check_win(state_, config_)) fail(e, "respawn after a win condition");
      const auto& pos = e.payload.at("positions");
      if (!pos.is_object() || pos.size() != state_.living().size()) fail(e, "positions must cover the survivors");
      for (auto p : state_.living()) {
        auto& a = state_.agent(p);
        if (!pos.contains(a.name)) fail(e, "no position for " + a.name);
        Event tmp{e.seq, e.tick, e.kind, json{{"r", pos[a.name]}}};
        const auto r = room(tmp, "r");
        a.location = r;
        a.visit(r);
        a.reset_partial_progress();
      }
      state_.bodies.clear();
      return;
    }
    default:
      fail(e, "not a meeting event");
  }
}

void Replayer::apply(const Event& e) {
  if (state_.phase == Phase::GameOver && started_) fail(e, "event after GameOver");
  if (!started_) {
    if (e.kind != EventKind::GameStart || e.seq != 0 || e.tick != 0) fail(e, "log must open with GameStart");
    if (player_list(e, "players") != [&] {
          std::vector<PlayerId> all;
          for (std::size_t i = 0; i < players_.size(); ++i) all.push_back(player_at(i));
          return all;
        }())
      fail(e, "player list does not match header");
    const auto& spawn = e.payload.at("spawn");
    state_.agents.resize(players_.size());
    for (std::size_t i = 0; i < players_.size(); ++i) {
      auto& a = state_.agents[i];
      a.id = player_at(i);
      a.name = players_[i];
      if (!spawn.contains(a.name)) fail(e, "no spawn room for " + a.name);
      Event tmp{e.seq, e.tick, e.kind, json{{"r", spawn[a.name]}}};
      const auto r = room(tmp, "r");
      a.location = r;
      a.visit(r);
    }
    started_ = true;
    return;
  }

  if (e.tick != state_.tick) begin_tick(e);

  switch (e.kind) {
    case EventKind::GameStart:
      fail(e, "duplicate GameStart");
    case EventKind::RoleAssigned: {
      if (e.tick != 0) fail(e, "roles are assigned at tick 0");
      auto& a = state_.agent(player(e, "player"));
      a.role = role_from(e.str("role"));
      if (a.is_duck()) a.cooldown = config_.kill_cooldown;
      return;
    }
    case EventKind::TaskAssigned: {
      if (e.tick != 0) fail(e, "tasks are assigned at tick 0");
      auto& a = state_.agent(player(e, "player"));
      const auto r = room(e, "room");
      if (static_cast<std::size_t>(e.num("task")) != a.tasks.size()) fail(e, "task index out of order");
      if (!map_->is_task_room(r)) fail(e, "not a task room");
      for (const auto& t : a.tasks) {
        if (t.room == r) fail(e, "duplicate task room");
      }
      if (e.payload.at("fake").get<bool>() != a.is_duck()) fail(e, "fake flag does not match role");
      a.tasks.push_back({r, 0, false});
      return;
    }
    case EventKind::MoveProgressed:
    case EventKind::Arrived:
    case EventKind::CooldownTick:
      apply_prelude(e);
      return;
    case EventKind::Said:
    case EventKind::Waited:
    case EventKind::MoveStarted:
    case EventKind::TaskProgressed:
    case EventKind::TaskCompleted:
    case EventKind::Killed:
    case EventKind::BodyReported:
    case EventKind::MeetingCalled:
      apply_action(e);
      return;
    case EventKind::GameOver: {
      if (!prelude_.empty()) fail(e, "GameOver before transit and cooldown events");
      const auto expected = check_win(state_, config_);
      const Outcome logged{team_from(e.str("winner")), win_reason_from(e.str("reason"))};
      if (!expected || *expected != logged) fail(e, "outcome does not follow from the state");
      if (expected->reason == WinReason::Timeout && state_.phase == Phase::FreeRoam) {
        for (auto p : state_.living()) {
          if (!acted_.empty() && !acted_[idx(p)]) fail(e, "timeout before every agent acted");
        }
      }
      state_.phase = Phase::GameOver;
      state_.outcome = logged;
      state_.meeting.reset();
      if (state_digest(state_, *map_) != e.str("digest")) fail(e, "state digest mismatch");
      return;
    }
    default:
      apply_meeting(e);
  }
}

ReplayResult replay(const GameLog& log, bool keep_ticks) {
  const Map map = map_of(log);
  Replayer r(map, log.header());
  ReplayResult out;
  const auto& ev = log.events();
  for (std::size_t i = 0; i < ev.size(); ++i) {
    r.apply(ev[i]);
    if (keep_ticks && (i + 1 == ev.size() || ev[i + 1].tick != ev[i].tick)) out.ticks.push_back(r.state());
  }
  if (!log.complete()) throw IncompleteLogError("log has no GameOver event");
  out.final_state = r.state();
  return out;
}

GameState replay_with(const GameLog& log, const std::function<void(const GameState&, const Event&)>& before) {
  const Map map = map_of(log);
  Replayer r(map, log.header());
  for (const auto& e : log.events()) {
    if (before) before(r.state(), e);
    r.apply(e);
  }
  return r.state();
}

}  // namespace quack
