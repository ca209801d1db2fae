#include "testkit.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <set>
#include <sstream>

#include "quack/error.hpp"
#include "quack/observation.hpp"
#include "quack/replay.hpp"

namespace quack::testkit {

using json = nlohmann::json;

// -- Scripted games --------------------------------------------------------------

GameConfig default_config(std::uint64_t seed) {
  GameConfig cfg;
  cfg.seed = seed;
  return cfg;
}

std::vector<SeatBinding> baseline_seats(std::size_t n) { return std::vector<SeatBinding>(n); }

GameLog scripted_game(std::uint64_t seed, const TickHook& hook) {
  return play_game(default_map(), default_config(seed), baseline_seats(), {}, "default", {}, {}, hook);
}

OccupancyFact occupancy_of(const AgentState& a) {
  OccupancyFact f;
  if (!a.alive) {
    f.kind = OccupancyKind::Dead;
  } else if (const auto* t = std::get_if<Transit>(&a.location)) {
    f.kind = OccupancyKind::Corridor;
    f.room = t->from;
    f.to = t->to;
  } else {
    f.kind = OccupancyKind::Room;
    f.room = std::get<RoomIndex>(a.location);
  }
  return f;
}

SnapshotRun run_with_snapshots(std::uint64_t seed) {
  SnapshotRun run;
  const auto& map = default_map();
  run.log = scripted_game(seed, [&](const GameState& s) {
    Snapshot snap;
    snap.tick = s.tick;
    snap.canonical = canonical_state(s, map);
    for (const auto& a : s.agents) snap.occupancy.push_back(occupancy_of(a));
    run.snapshots.push_back(std::move(snap));
  });
  return run;
}

namespace {

bool same_place(const OccupancyFact& a, const OccupancyFact& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == OccupancyKind::Dead) return true;
  if (a.kind == OccupancyKind::Room) return a.room == b.room;
  return a.room == b.room && a.to == b.to;
}

}  // namespace

std::string compare_with_replay(const SnapshotRun& run) {
  const auto replayed = replay(run.log, true);
  const auto traj = reconstruct_trajectories(run.log);
  const auto& map = default_map();
  if (replayed.ticks.size() != run.snapshots.size()) {
    return "tick count: replay " + std::to_string(replayed.ticks.size()) + " vs engine " +
           std::to_string(run.snapshots.size());
  }
  for (std::size_t i = 0; i < run.snapshots.size(); ++i) {
    const auto& snap = run.snapshots[i];
    const auto& st = replayed.ticks[i];
    if (st.tick != snap.tick) return "tick index " + std::to_string(i) + " holds tick " + std::to_string(st.tick);
    if (canonical_state(st, map) != snap.canonical) return "state differs at tick " + std::to_string(snap.tick);
    for (std::size_t p = 0; p < snap.occupancy.size(); ++p) {
      const auto& f = traj.at_tick_end(player_at(p), snap.tick);
      if (!same_place(f, snap.occupancy[p]))
        return "occupancy of " + traj.names[p] + " differs at tick " + std::to_string(snap.tick);
    }
  }
  return {};
}

// -- Occupancy scan oracle -------------------------------------------------------

std::optional<std::size_t> Scan::find(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names.begin());
}

namespace {

ScanPos pos_of(const AgentState& a) {
  const auto f = occupancy_of(a);
  return {f.kind, f.room, f.to};
}

std::vector<ScanPos> positions(const GameState& s, std::size_t n) {
  std::vector<ScanPos> out(n);
  for (std::size_t i = 0; i < s.agents.size() && i < n; ++i) out[i] = pos_of(s.agents[i]);
  return out;
}

}  // namespace

Scan scan_log(const GameLog& log) {
  Scan sc;
  sc.names = log.header().players;
  const auto n = sc.names.size();
  sc.roles.assign(n, Role::Goose);
  sc.death_seq.assign(n, std::nullopt);
  std::vector<std::vector<ScanPos>> before;

  const auto final_state = replay_with(log, [&](const GameState& s, const Event& e) {
    before.push_back(positions(s, n));
    sc.tick.push_back(e.tick);
    auto who = [&](const char* key) { return *sc.find(e.str(key)); };
    switch (e.kind) {
      case EventKind::RoleAssigned: sc.roles[who("player")] = role_from(e.str("role")); break;
      case EventKind::TaskProgressed:
      case EventKind::Waited: {
        const auto p = who("player");
        const auto here = room_of(s.agents[p].location);
        if (!here) break;
        (e.kind == EventKind::TaskProgressed ? sc.tasks : sc.waits).push_back({e.seq, p, *here});
        break;
      }
      case EventKind::MoveStarted: {
        const auto p = who("player");
        const auto from = std::get<RoomIndex>(s.agents[p].location);
        for (auto q : s.occupants(from)) {
          if (idx(q) != p) sc.witnessed.push_back({e.seq, idx(q), p, from});
        }
        break;
      }
      case EventKind::Arrived: {
        const auto p = who("player");
        const auto to = std::get<Transit>(s.agents[p].location).to;
        for (auto q : s.occupants(to)) {
          if (idx(q) != p) sc.witnessed.push_back({e.seq, idx(q), p, to});
        }
        break;
      }
      default: break;
    }
  });

  const auto count = before.size();
  sc.pos.resize(count);
  for (std::size_t s = 0; s + 1 < count; ++s) sc.pos[s] = before[s + 1];
  if (count) sc.pos[count - 1] = positions(final_state, n);
  for (std::size_t s = 0; s < count; ++s) {
    for (std::size_t p = 0; p < n; ++p) {
      if (!sc.death_seq[p] && sc.pos[s][p].kind == OccupancyKind::Dead) sc.death_seq[p] = s;
    }
  }

  ScanSegment cur;
  for (const auto& e : log.events()) {
    if (e.kind == EventKind::Respawned) {
      cur.start_seq = e.seq;
      cur.start_tick = e.tick;
    }
    if (e.kind == EventKind::PhaseChanged && e.str("to") == to_string(Phase::Discussion)) {
      auto seg = cur;
      seg.end_seq = e.seq - 1;
      seg.end_tick = e.tick;
      sc.segments.push_back(seg);
    }
  }
  return sc;
}

namespace {

struct Window {
  int start;
  int end;
  bool duration;
};

std::optional<Window> oracle_window(const std::string& temporal, const ScanSegment& seg) {
  std::optional<Window> w;
  int a = 0;
  int b = 0;
  if (temporal == "the whole time") {
    w = Window{seg.start_tick, seg.end_tick, true};
  } else if (std::sscanf(temporal.c_str(), "between ticks %d-%d", &a, &b) == 2) {
    if (a >= 0 && a <= b) w = Window{a - 1, b + 1, false};
  } else if (std::sscanf(temporal.c_str(), "around tick %d", &a) == 1) {
    w = Window{a - 1, a + 1, false};
  } else if (temporal == "at the start") {
    w = Window{seg.start_tick, seg.start_tick + 2, false};
  } else if (temporal == "just now") {
    w = Window{seg.end_tick - 2, seg.end_tick, false};
  } else if (temporal == "this round") {
    w = Window{seg.start_tick, seg.end_tick, false};
  }
  if (!w) return std::nullopt;
  w->start = std::max(w->start, seg.start_tick);
  w->end = std::min(w->end, seg.end_tick);
  if (w->start > w->end) return std::nullopt;
  return w;
}

bool in_room(const ScanPos& p, RoomIndex r) { return p.kind == OccupancyKind::Room && p.room == r; }

OracleVerdict judge_spatial(const Claim& c, const Map& map, const Scan& sc, const ScanSegment& seg) {
  OracleVerdict v;
  const auto w = oracle_window(c.temporal, seg);
  if (!w) return v;
  const auto subj = sc.find(c.subject);
  if (!subj || (c.target && !sc.find(*c.target))) return v;

  std::vector<std::uint64_t> S;
  for (std::uint64_t s = seg.start_seq; s <= seg.end_seq; ++s) {
    if (sc.tick[s] >= w->start && sc.tick[s] <= w->end) S.push_back(s);
  }
  const std::uint64_t lo = S.empty() ? seg.start_seq : S.front();
  auto in_S = [&](std::uint64_t s) { return std::binary_search(S.begin(), S.end(), s); };
  if (sc.death_seq[*subj] && *sc.death_seq[*subj] < lo) return v;

  const auto here_or_elsewhere = [&](bool here, bool elsewhere) {
    if (here) return VerdictResult::True;
    if (elsewhere) return VerdictResult::WrongRoom;
    return VerdictResult::False;
  };

  switch (c.type) {
    case ClaimType::Location: {
      const auto room = map.at(*c.room);
      std::set<int> ticks_all;
      std::set<int> ticks_in;
      std::set<RoomIndex> others;
      for (auto s : S) {
        const auto& p = sc.pos[s][*subj];
        ticks_all.insert(sc.tick[s]);
        if (in_room(p, room)) {
          ticks_in.insert(sc.tick[s]);
        } else if (p.kind == OccupancyKind::Room) {
          others.insert(p.room);
        }
      }
      if (!ticks_in.empty()) {
        if (!w->duration) {
          v.result = VerdictResult::True;
        } else {
          v.result = ticks_in.size() * 5 >= ticks_all.size() * 4 ? VerdictResult::True : VerdictResult::NearMiss;
        }
        return v;
      }
      v.result = VerdictResult::False;
      if (others.size() == 1) {
        const auto other = *others.begin();
        for (const auto* list : {&sc.tasks, &sc.waits}) {
          for (const auto& a : *list) {
            if (a.player == *subj && a.room == other && in_S(a.seq)) v.result = VerdictResult::WrongRoom;
          }
        }
      }
      return v;
    }
    case ClaimType::Route: {
      std::vector<RoomIndex> seq;
      for (auto s : S) {
        const auto& p = sc.pos[s][*subj];
        if (p.kind != OccupancyKind::Room) continue;
        if (seq.empty() || seq.back() != p.room) seq.push_back(p.room);
      }
      std::size_t k = 0;
      for (auto r : seq) {
        if (k < c.route.size() && map.name(r) == c.route[k]) ++k;
      }
      v.result = k == c.route.size() ? VerdictResult::True : VerdictResult::False;
      return v;
    }
    case ClaimType::Sighting: {
      const auto t = *sc.find(*c.target);
      if (sc.death_seq[t] && *sc.death_seq[t] < lo) {
        v.result = VerdictResult::False;
        return v;
      }
      const auto room = map.at(*c.room);
      bool here = false;
      bool elsewhere = false;
      for (auto s : S) {
        const auto& a = sc.pos[s][*subj];
        const auto& b = sc.pos[s][t];
        if (a.kind == OccupancyKind::Room && in_room(b, a.room)) (a.room == room ? here : elsewhere) = true;
      }
      for (const auto& wr : sc.witnessed) {
        if (wr.observer == *subj && wr.mover == t && in_S(wr.seq)) (wr.room == room ? here : elsewhere) = true;
      }
      v.result = here_or_elsewhere(here, elsewhere);
      return v;
    }
    case ClaimType::Activity: {
      const auto room = map.at(*c.room);
      bool here = false;
      bool elsewhere = false;
      if (*c.activity == ActivityKind::Traveling) {
        for (auto s : S) {
          const auto& p = sc.pos[s][*subj];
          if (p.kind != OccupancyKind::Corridor) continue;
          (p.room == room || p.to == room ? here : elsewhere) = true;
        }
      } else {
        const auto& list = *c.activity == ActivityKind::Task ? sc.tasks : sc.waits;
        for (const auto& a : list) {
          if (a.player == *subj && in_S(a.seq)) (a.room == room ? here : elsewhere) = true;
        }
      }
      v.result = here_or_elsewhere(here, elsewhere);
      return v;
    }
    default: return v;
  }
}

}  // namespace

std::vector<OracleVerdict> oracle_verdicts(const Map& map, const Scan& sc, const std::vector<Claim>& claims) {
  std::vector<OracleVerdict> out(claims.size());
  auto seg_of = [&](const Claim& c) -> const ScanSegment* {
    if (c.meeting < 0 || static_cast<std::size_t>(c.meeting) >= sc.segments.size()) return nullptr;
    return &sc.segments[static_cast<std::size_t>(c.meeting)];
  };
  auto social = [](const Claim& c) { return c.type == ClaimType::Accusation || c.type == ClaimType::Defense; };

  for (std::size_t i = 0; i < claims.size(); ++i) {
    if (social(claims[i])) continue;
    if (const auto* seg = seg_of(claims[i])) out[i] = judge_spatial(claims[i], map, sc, *seg);
  }
  for (std::size_t i = 0; i < claims.size(); ++i) {
    const auto& c = claims[i];
    if (!social(c)) continue;
    const auto* seg = seg_of(c);
    const auto a = sc.find(c.subject);
    const auto t = c.target ? sc.find(*c.target) : std::nullopt;
    if (!seg || !a || !t) continue;
    bool grounded = false;
    for (auto s = seg->start_seq; s <= seg->end_seq && !grounded; ++s) {
      const auto& pa = sc.pos[s][*a];
      if (pa.kind == OccupancyKind::Room && in_room(sc.pos[s][*t], pa.room)) grounded = true;
    }
    for (const auto& wr : sc.witnessed) {
      if (wr.observer == *a && wr.mover == *t && wr.seq >= seg->start_seq && wr.seq <= seg->end_seq) grounded = true;
    }
    for (std::size_t j = 0; j < claims.size(); ++j) {
      const auto& o = claims[j];
      if (social(o) || o.meeting != c.meeting || o.speaker != c.subject) continue;
      if (out[j].result != VerdictResult::True) continue;
      if (o.subject == *c.target || o.target == *c.target) grounded = true;
    }
    out[i].grounded = grounded;
    if (c.type == ClaimType::Accusation) out[i].outcome_correct = sc.roles[*t] == Role::Duck;
  }
  return out;
}

std::string describe(const OracleVerdict& v) {
  std::string s(to_string(v.result));
  if (v.outcome_correct) s += *v.outcome_correct ? " outcome=correct" : " outcome=wrong";
  if (v.grounded) s += *v.grounded ? " grounded" : " ungrounded";
  return s;
}

std::vector<Claim> random_claims(const GameLog& log, const Scan& sc, Rng& rng, int count) {
  std::vector<Claim> out;
  if (sc.segments.empty()) return out;
  const auto map = map_of(log);
  const auto n = sc.names.size();
  auto pick = [&](const auto& v) { return v[static_cast<std::size_t>(rng.below(v.size()))]; };
  auto chance = [&](double p) { return rng.unit() < p; };
  auto any_room = [&] { return map.name(static_cast<RoomIndex>(rng.below(map.room_count()))); };

  for (int i = 0; i < count; ++i) {
    const auto m = static_cast<std::size_t>(rng.below(sc.segments.size()));
    const auto& seg = sc.segments[m];
    std::vector<std::size_t> living;
    for (std::size_t p = 0; p < n; ++p) {
      if (sc.pos[seg.end_seq][p].kind != OccupancyKind::Dead) living.push_back(p);
    }
    const auto speaker = pick(living);
    std::string subject = sc.names[chance(0.8) ? speaker : static_cast<std::size_t>(rng.below(n))];
    if (chance(0.02)) subject = "Nobody";
    const auto subj = sc.find(subject);

    // Rooms the subject stood in this segment, in order.
    std::vector<std::string> visited;
    if (subj) {
      for (auto s = seg.start_seq; s <= seg.end_seq; ++s) {
        const auto& p = sc.pos[s][*subj];
        if (p.kind != OccupancyKind::Room) continue;
        const auto& name = map.name(p.room);
        if (visited.empty() || visited.back() != name) visited.push_back(name);
      }
    }
    auto claim_room = [&] { return !visited.empty() && chance(0.55) ? pick(visited) : any_room(); };
    auto other_player = [&] {
      auto t = static_cast<std::size_t>(rng.below(n));
      if (subj && t == *subj) t = (t + 1) % n;
      return sc.names[t];
    };
    auto temporal = [&]() -> std::string {
      const double r = rng.unit();
      if (r < 0.25) return "this round";
      if (r < 0.45) return "the whole time";
      if (r < 0.55) return "at the start";
      if (r < 0.70) return "just now";
      const int span = seg.end_tick - seg.start_tick + 3;
      if (r < 0.85) return "around tick " + std::to_string(std::max(0, seg.start_tick - 1 + static_cast<int>(rng.below(span))));
      if (r < 0.95) {
        const int a = std::max(0, seg.start_tick - 1 + static_cast<int>(rng.below(span)));
        const int b = a + static_cast<int>(rng.below(4));
        return "between ticks " + std::to_string(a) + "-" + std::to_string(b);
      }
      return "sometime yesterday";
    };

    Claim c;
    c.id = "r" + std::to_string(i);
    c.speaker = sc.names[speaker];
    c.meeting = static_cast<int>(m);
    c.meeting_tick = seg.end_tick;
    c.subject = subject;
    const double r = rng.unit();
    if (r < 0.30) {
      c.type = ClaimType::Location;
      c.room = claim_room();
      c.temporal = temporal();
    } else if (r < 0.42) {
      c.type = ClaimType::Route;
      const std::size_t len = 2 + static_cast<std::size_t>(rng.below(3));
      if (visited.size() >= 2 && chance(0.6)) {
        // An ordered sample of the real route.
        for (const auto& room : visited) {
          if (chance(0.6) && (c.route.empty() || c.route.back() != room)) c.route.push_back(room);
        }
        if (c.route.empty()) c.route.push_back(visited.front());
      } else {
        while (c.route.size() < len) {
          auto room = any_room();
          if (c.route.empty() || c.route.back() != room) c.route.push_back(room);
        }
      }
      c.temporal = temporal();
    } else if (r < 0.62) {
      c.type = ClaimType::Sighting;
      c.target = chance(0.02) ? std::string("Nobody") : other_player();
      c.room = claim_room();
      c.temporal = temporal();
    } else if (r < 0.78) {
      c.type = ClaimType::Activity;
      c.activity = static_cast<ActivityKind>(rng.below(3));
      c.room = claim_room();
      c.temporal = temporal();
    } else if (r < 0.94) {
      c.type = ClaimType::Accusation;
      c.subject = sc.names[speaker];
      c.target = other_player();
      c.confidence = static_cast<Confidence>(rng.below(3));
    } else {
      c.type = ClaimType::Defense;
      c.subject = sc.names[speaker];
      c.target = other_player();
    }
    out.push_back(std::move(c));
  }
  return out;
}

// -- Small oracles ---------------------------------------------------------------

std::optional<PlayerId> brute_force_tally(const std::map<PlayerId, Ballot>& votes) {
  std::map<PlayerId, int> count;
  int skips = 0;
  for (const auto& [voter, b] : votes) {
    if (b.target) {
      ++count[*b.target];
    } else {
      ++skips;
    }
  }
  int best = 0;
  for (const auto& [p, c] : count) best = std::max(best, c);
  std::vector<PlayerId> leaders;
  for (const auto& [p, c] : count) {
    if (c == best) leaders.push_back(p);
  }
  if (leaders.size() != 1 || best <= skips) return std::nullopt;
  return leaders.front();
}

TravelPlan brute_force_path(const Map& map, RoomIndex from, RoomIndex to) {
  TravelPlan best;
  best.cost = -1;
  std::vector<RoomIndex> path{from};
  std::vector<bool> used(map.room_count(), false);
  used[idx(from)] = true;
  std::function<void(int)> dfs = [&](int cost) {
    const auto here = path.back();
    if (here == to) {
      if (best.cost < 0 || cost < best.cost || (cost == best.cost && path < best.path)) {
        best.cost = cost;
        best.path = path;
      }
      return;
    }
    for (const auto& nb : map.adjacent(here)) {
      if (used[idx(nb.room)]) continue;
      used[idx(nb.room)] = true;
      path.push_back(nb.room);
      dfs(cost + nb.weight);
      path.pop_back();
      used[idx(nb.room)] = false;
    }
  };
  dfs(0);
  return best;
}

// -- Observation hiding ----------------------------------------------------------

namespace {

class Sampler : public DecisionSource {
 public:
  Sampler(AgentTable& inner, const GameConfig& cfg, Rng& rng, std::vector<SampledState>& out, std::size_t cap)
      : inner_(inner), cfg_(cfg), rng_(rng), out_(out), cap_(cap) {}

  Action choose_action(const GameState& s, PlayerId agent, std::span<const Action> legal) override {
    if (out_.size() < cap_ && rng_.unit() < 0.2) out_.push_back({s, cfg_, agent});
    return inner_.choose_action(s, agent, legal);
  }
  Speech speak(const GameState& s, PlayerId agent) override { return inner_.speak(s, agent); }
  Ballot vote(const GameState& s, PlayerId agent) override { return inner_.vote(s, agent); }
  void observe(const GameState& s, PlayerId agent) override { inner_.observe(s, agent); }

 private:
  AgentTable& inner_;
  const GameConfig& cfg_;
  Rng& rng_;
  std::vector<SampledState>& out_;
  std::size_t cap_;
};

bool mentions(const std::string& text, const std::string& name) {
  auto word = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
  for (auto pos = text.find(name); pos != std::string::npos; pos = text.find(name, pos + 1)) {
    const bool left = pos == 0 || !word(text[pos - 1]);
    const auto end = pos + name.size();
    const bool right = end >= text.size() || !word(text[end]);
    if (left && right) return true;
  }
  return false;
}

}  // namespace

std::vector<SampledState> sample_states(std::uint64_t seed, std::size_t count) {
  std::vector<SampledState> out;
  const auto& map = default_map();
  Rng rng(seed);
  const std::vector<std::string> goose_kinds{"task_goose", "buddy_goose", "random_walker"};
  const std::vector<std::string> duck_kinds{"stalker_duck", "random_walker"};
  for (std::uint64_t g = 0; out.size() < count; ++g) {
    GameConfig cfg;
    cfg.seed = derive_seed(seed, g);
    cfg.n_agents = 4 + static_cast<int>(rng.below(5));
    cfg.n_ducks = 1 + static_cast<int>(rng.below(2));
    cfg.kill_cooldown = static_cast<int>(rng.below(6));
    Game game(map, cfg);
    std::vector<std::string> players;
    for (const auto& a : game.state().agents) players.push_back(a.name);
    std::vector<std::unique_ptr<Policy>> seats;
    for (std::size_t i = 0; i < players.size(); ++i) {
      const auto& a = game.state().agents[i];
      const auto& kinds = a.is_duck() ? duck_kinds : goose_kinds;
      const auto& kind = kinds[static_cast<std::size_t>(rng.below(kinds.size()))];
      seats.push_back(make_scripted_policy(kind, {&map, cfg, a.name, a.role, players, derive_seed(cfg.seed, 100 + i)}));
    }
    AgentTable table(map, cfg, std::move(seats));
    Sampler sampler(table, cfg, rng, out, count);
    game.run(sampler);
  }
  return out;
}

std::vector<std::string> hiding_violations(const SampledState& ss, const Map& map) {
  const auto& s = ss.state;
  const auto obs = build_observation(s, map, ss.config, ss.viewer);
  auto text = obs.summary.to_text();
  // What co-located speakers said is their own business; only who spoke counts.
  for (const auto& c : obs.summary.chat) {
    const auto quoted = "\"" + c.text + "\"";
    for (auto pos = text.find(quoted); pos != std::string::npos; pos = text.find(quoted)) text.erase(pos, quoted.size());
  }

  const auto& me = s.agent(ss.viewer);
  std::set<std::string> visible{me.name};
  std::set<std::string> named_only;
  const auto here = room_of(me.location);
  if (here) {
    for (auto p : s.occupants(*here)) visible.insert(s.agent(p).name);
    for (const auto& b : s.bodies) {
      if (b.room == *here) visible.insert(s.agent(b.victim).name);
    }
    for (const auto& c : s.buffers.chat) {
      if (c.room == *here) named_only.insert(s.agent(c.speaker).name);
    }
  }
  for (const auto& m : s.buffers.moves) {
    if (std::find(m.witnesses.begin(), m.witnesses.end(), ss.viewer) != m.witnesses.end())
      visible.insert(s.agent(m.mover).name);
  }
  if (me.is_duck()) {
    for (const auto& a : s.agents) {
      if (a.is_duck()) named_only.insert(a.name);
    }
  }

  std::vector<std::string> bad;
  for (const auto& a : s.agents) {
    if (visible.count(a.name)) continue;
    if (!named_only.count(a.name) && mentions(text, a.name)) bad.push_back("summary names " + a.name);
    if (mentions(obs.global_view.svg, a.name)) bad.push_back("global view shows " + a.name);
    if (mentions(obs.local_view.svg, a.name)) bad.push_back("local view shows " + a.name);
  }
  return bad;
}

// -- Hand-built fixture games ----------------------------------------------------

const Map& line_map() {
  static const Map m = Map::load(R"({
    "id": "line-3",
    "rooms": ["alpha", "bravo", "charlie"],
    "corridors": [
      {"a": "alpha", "b": "bravo", "weight": 1},
      {"a": "bravo", "b": "charlie", "weight": 1}
    ],
    "task_rooms": ["alpha"],
    "emergency_room": "alpha"
  })");
  return m;
}

Cast cast_of(const GameState& s) {
  Cast c;
  for (const auto& a : s.agents) {
    if (a.is_duck()) {
      c.duck = a.id;
    } else {
      c.geese.push_back(a.id);
    }
  }
  return c;
}

namespace {

class ScriptSource : public DecisionSource {
 public:
  ScriptSource(const FixtureScript& script, Cast cast) : script_(script), cast_(std::move(cast)) {}

  Action choose_action(const GameState& s, PlayerId agent, std::span<const Action>) override {
    return script_.act(s, cast_, agent);
  }
  Speech speak(const GameState& s, PlayerId agent) override {
    return {script_.speak ? script_.speak(s, cast_, agent) : std::string("Nothing to add."), {}};
  }
  Ballot vote(const GameState& s, PlayerId agent) override {
    return {script_.vote ? script_.vote(s, cast_, agent) : std::nullopt, {}};
  }

 private:
  const FixtureScript& script_;
  Cast cast_;
};

}  // namespace

GameLog run_fixture(const FixtureScript& script) {
  const auto& map = line_map();
  for (std::uint64_t seed = 0; seed < 200000; ++seed) {
    auto cfg = script.config;
    cfg.seed = seed;
    Game game(map, cfg, script.names);
    const auto cast = cast_of(game.state());
    if (!script.accept(game.state(), cast)) continue;
    ScriptSource src(script, cast);
    game.run(src);
    return game.log();
  }
  throw Error("no seed satisfies the fixture's starting conditions");
}

Action step_toward(const Map& map, const GameState& s, PlayerId p, RoomIndex dest) {
  const auto here = room_of(s.agent(p).location);
  if (!here || *here == dest) return Action::wait();
  return Action::move(map.shortest_travel(*here, dest).path.at(1));
}

GameConfig line_config(int n) {
  GameConfig cfg;
  cfg.n_agents = n;
  cfg.n_ducks = 1;
  cfg.tasks_per_goose = 1;
  cfg.kill_cooldown = 10;
  cfg.task_duration = 2;
  cfg.tick_budget = 30;
  cfg.discussion_rounds = 1;
  cfg.meeting_budget = 3;
  return cfg;
}

const std::vector<std::string> kFixtureNames{"Ann", "Ben", "Cat", "Dan", "Eli"};

namespace {

std::vector<std::string> fixture_names(int n) {
  return {kFixtureNames.begin(), kFixtureNames.begin() + n};
}

RoomIndex R(const char* name) { return line_map().at(name); }

bool all_in(const GameState& s, RoomIndex r) {
  return std::all_of(s.agents.begin(), s.agents.end(), [&](const AgentState& a) { return room_of(a.location) == r; });
}

std::string say(std::initializer_list<Claim> claims) {
  std::string out = "Here is what I know.";
  for (const auto& c : claims) out += " " + to_dsl(c);
  return out;
}

}  // namespace

GameLog fixture_tasks() {
  FixtureScript f;
  f.config = line_config(3);
  f.names = fixture_names(3);
  f.accept = [](const GameState& s, const Cast&) { return all_in(s, R("alpha")); };
  f.act = [](const GameState& s, const Cast& c, PlayerId p) {
    const int t = s.tick;
    if (p == c.goose(1)) return t <= 2 ? Action::wait() : Action::do_task();
    if (p == c.goose(2)) {
      if (t == 1) return Action::move(R("bravo"));
      if (t == 2) return Action::move(R("alpha"));
      return Action::do_task();
    }
    return Action::wait();
  };
  return run_fixture(f);
}

GameLog fixture_kill_vote() {
  FixtureScript f;
  f.config = line_config(4);
  f.config.kill_cooldown = 1;
  f.config.task_duration = 3;
  f.names = fixture_names(4);
  f.accept = [](const GameState& s, const Cast& c) {
    for (auto p : {c.duck, c.goose(1), c.goose(2)}) {
      if (room_of(s.agent(p).location) != R("alpha")) return false;
    }
    return room_of(s.agent(c.goose(3)).location) == R("charlie");
  };
  f.act = [](const GameState& s, const Cast& c, PlayerId p) {
    const int t = s.tick;
    if (p == c.duck) {
      if (t == 1) return Action::kill(c.goose(1));
      if (t == 2) return Action::move(R("bravo"));
      if (t == 3) return Action::move(R("charlie"));
      return Action::wait();
    }
    if (p == c.goose(2) && t == 5) return Action::report();
    return Action::wait();
  };
  f.speak = [](const GameState& s, const Cast& c, PlayerId p) -> std::string {
    const auto& D = s.agent(c.duck).name;
    const auto& G1 = s.agent(c.goose(1)).name;
    const auto& G2 = s.agent(c.goose(2)).name;
    const auto& G3 = s.agent(c.goose(3)).name;
    if (p == c.goose(2)) {
      return say({location(G2, "alpha", "this round"), sighting(G2, D, "alpha", "at the start"), accusation(G2, D)});
    }
    if (p == c.goose(3)) {
      return say({location(G3, "bravo", "this round"), sighting(G3, G1, "charlie", "this round"),
                  location(G3, "charlie", "the whole time"), activity(G3, ActivityKind::Waiting, "charlie", "this round"),
                  accusation(G3, G2)});
    }
    return say({location(D, "bravo", "the whole time"), location(D, "charlie", "at the start"),
                location(D, "bravo", "around tick 5"), route(D, {"alpha", "bravo", "charlie"}, "this round"),
                defense(D, G2), accusation(D, G3)});
  };
  f.vote = [](const GameState&, const Cast& c, PlayerId p) -> std::optional<PlayerId> {
    if (p == c.goose(3)) return std::nullopt;
    return c.goose(3);
  };
  return run_fixture(f);
}

GameLog fixture_emergencies() {
  FixtureScript f;
  f.config = line_config(5);
  f.names = fixture_names(5);
  f.accept = [](const GameState& s, const Cast&) { return all_in(s, R("alpha")); };
  f.act = [](const GameState& s, const Cast& c, PlayerId p) {
    if (p == c.duck) return Action::wait();
    if (s.meetings_held == 0) return p == c.goose(1) ? Action::call_meeting() : Action::wait();
    if (room_of(s.agent(p).location) == R("alpha")) return Action::call_meeting();
    return step_toward(line_map(), s, p, R("alpha"));
  };
  f.vote = [](const GameState& s, const Cast& c, PlayerId p) -> std::optional<PlayerId> {
    if (s.meetings_held == 1) {
      if (p == c.goose(4)) return std::nullopt;
      return c.goose(4);
    }
    if (p == c.duck) return std::nullopt;
    return c.duck;
  };
  return run_fixture(f);
}

GameLog fixture_timeout() {
  FixtureScript f;
  f.config = line_config(3);
  f.config.tick_budget = 4;
  f.names = fixture_names(3);
  f.accept = [](const GameState& s, const Cast&) { return all_in(s, R("alpha")); };
  f.act = [](const GameState& s, const Cast& c, PlayerId p) {
    if (p == c.goose(1) && s.tick <= 2) return Action::do_task();
    return Action::wait();
  };
  return run_fixture(f);
}

GameLog fixture_self_report() {
  FixtureScript f;
  f.config = line_config(4);
  f.config.kill_cooldown = 1;
  f.config.task_duration = 3;
  f.config.tick_budget = 3;
  f.names = fixture_names(4);
  f.accept = [](const GameState& s, const Cast&) { return all_in(s, R("alpha")); };
  f.act = [](const GameState& s, const Cast& c, PlayerId p) {
    if (p == c.duck) {
      if (s.tick == 1) return Action::kill(c.goose(1));
      if (s.tick == 2) return Action::report();
    }
    return Action::wait();
  };
  return run_fixture(f);
}

// -- Claim builders --------------------------------------------------------------

Claim location(const std::string& who, const std::string& room, const std::string& temporal) {
  Claim c;
  c.type = ClaimType::Location;
  c.subject = who;
  c.room = room;
  c.temporal = temporal;
  return c;
}

Claim route(const std::string& who, std::vector<std::string> rooms, const std::string& temporal) {
  Claim c;
  c.type = ClaimType::Route;
  c.subject = who;
  c.route = std::move(rooms);
  c.temporal = temporal;
  return c;
}

Claim sighting(const std::string& who, const std::string& target, const std::string& room,
               const std::string& temporal) {
  Claim c;
  c.type = ClaimType::Sighting;
  c.subject = who;
  c.target = target;
  c.room = room;
  c.temporal = temporal;
  return c;
}

Claim activity(const std::string& who, ActivityKind kind, const std::string& room, const std::string& temporal) {
  Claim c;
  c.type = ClaimType::Activity;
  c.subject = who;
  c.activity = kind;
  c.room = room;
  c.temporal = temporal;
  return c;
}

Claim accusation(const std::string& who, const std::string& target) {
  Claim c;
  c.type = ClaimType::Accusation;
  c.subject = who;
  c.target = target;
  c.confidence = Confidence::Strong;
  return c;
}

Claim defense(const std::string& who, const std::string& target) {
  Claim c;
  c.type = ClaimType::Defense;
  c.subject = who;
  c.target = target;
  return c;
}

}  // namespace quack::testkit
