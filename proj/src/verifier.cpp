#include "quack/verifier.hpp"

#include <algorithm>
#include <array>
#include <set>

#include "quack/error.hpp"
#include "quack/util.hpp"

namespace quack {

using nlohmann::json;

// -- Trajectories ----------------------------------------------------------------

std::size_t AgentTrajectory::fact_at(std::uint64_t seq) const {
  auto it = std::upper_bound(facts.begin(), facts.end(), seq,
                             [](std::uint64_t s, const OccupancyFact& f) { return s < f.seq; });
  if (it == facts.begin()) throw Error("no occupancy before seq " + std::to_string(seq));
  return static_cast<std::size_t>(it - facts.begin()) - 1;
}

std::uint64_t AgentTrajectory::fact_end(std::size_t i, std::uint64_t end_seq) const {
  return i + 1 < facts.size() ? facts[i + 1].seq : end_seq + 1;
}

std::optional<PlayerId> TrajectorySet::find(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return player_at(i);
  }
  return std::nullopt;
}

const OccupancyFact& TrajectorySet::at_tick_end(PlayerId p, int tick) const {
  const auto& a = of(p);
  return a.facts[a.fact_at(tick_seqs.at(static_cast<std::size_t>(tick)).second)];
}

TrajectorySet reconstruct_trajectories(const GameLog& log) {
  TrajectorySet ts;
  ts.map = std::make_shared<const Map>(map_of(log));
  const Map& map = *ts.map;
  ts.names = log.header().players;
  ts.roles = roles_of(log);
  ts.agents.resize(ts.names.size());

  auto pid = [&](const std::string& name) {
    auto p = ts.find(name);
    if (!p) throw Error("trajectory: unknown player " + name);
    return *p;
  };
  auto rid = [&](const json& v) { return map.at(v.get<std::string>()); };
  auto push = [&](PlayerId p, OccupancyKind k, RoomIndex r, RoomIndex to, const Event& e) {
    ts.agents[idx(p)].facts.push_back({k, r, to, e.seq, e.tick});
  };
  auto witnesses = [&](const Event& e, PlayerId mover, RoomIndex room, bool departed) {
    for (const auto& w : e.payload.at("witnesses")) {
      ts.agents[idx(pid(w.get<std::string>()))].witnessed.push_back({e.seq, e.tick, mover, room, departed});
    }
  };

  for (const auto& e : log.events()) {
    const auto t = static_cast<std::size_t>(e.tick);
    if (ts.tick_seqs.size() <= t) ts.tick_seqs.resize(t + 1, {e.seq, e.seq});
    ts.tick_seqs[t].second = e.seq;

    switch (e.kind) {
      case EventKind::GameStart:
        for (const auto& [name, room] : e.payload.at("spawn").items()) {
          push(pid(name), OccupancyKind::Room, rid(room), {}, e);
        }
        break;
      case EventKind::MoveStarted: {
        const auto p = pid(e.str("player"));
        const auto from = rid(e.payload["from"]);
        push(p, OccupancyKind::Corridor, from, rid(e.payload["to"]), e);
        witnesses(e, p, from, true);
        break;
      }
      case EventKind::Arrived: {
        const auto p = pid(e.str("player"));
        const auto to = rid(e.payload["to"]);
        push(p, OccupancyKind::Room, to, {}, e);
        witnesses(e, p, to, false);
        break;
      }
      case EventKind::PhaseChanged:
        for (const auto& c : e.payload.at("cancelled")) {
          const auto p = pid(c.get<std::string>());
          const auto& last = ts.agents[idx(p)].facts.back();
          push(p, OccupancyKind::Room, last.room, {}, e);
        }
        break;
      case EventKind::Killed:
      case EventKind::Ejected: {
        const auto p = pid(e.kind == EventKind::Killed ? e.str("victim") : e.str("player"));
        push(p, OccupancyKind::Dead, {}, {}, e);
        ts.agents[idx(p)].death_seq = e.seq;
        ts.agents[idx(p)].death_tick = e.tick;
        break;
      }
      case EventKind::Respawned:
        for (const auto& [name, room] : e.payload.at("positions").items()) {
          push(pid(name), OccupancyKind::Room, rid(room), {}, e);
        }
        break;
      case EventKind::TaskProgressed:
        ts.agents[idx(pid(e.str("player")))].tasks.push_back({e.seq, e.tick, rid(e.payload["room"])});
        break;
      case EventKind::Waited:
        if (!e.payload.at("room").is_null())
          ts.agents[idx(pid(e.str("player")))].waits.push_back({e.seq, e.tick, rid(e.payload["room"])});
        break;
      default:
        break;
    }
  }
  if (!log.events().empty()) {
    ts.end_seq = log.events().back().seq;
    ts.final_tick = log.events().back().tick;
  }
  return ts;
}

// -- Verdicts --------------------------------------------------------------------

namespace {

constexpr std::array<std::string_view, 5> kResultNames{"true", "false", "wrong_room", "near_miss", "unverifiable"};

struct Ctx {
  const TrajectorySet& traj;
  const Map& map;
  SeqRange range;
};

bool overlaps(std::uint64_t s, std::uint64_t e, std::uint64_t lo, std::uint64_t hi) { return s <= hi && e > lo; }

std::string describe(const OccupancyFact& f, const std::string& who, const std::vector<std::string>& rooms) {
  switch (f.kind) {
    case OccupancyKind::Room: return who + " in " + rooms[idx(f.room)];
    case OccupancyKind::Corridor: return who + " in corridor " + rooms[idx(f.room)] + "-" + rooms[idx(f.to)];
    case OccupancyKind::Dead: return who + " dead";
  }
  return who;
}

// Indices of facts of `a` overlapping [lo, hi].
std::vector<std::size_t> facts_in(const AgentTrajectory& a, SeqRange r, std::uint64_t end_seq) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < a.facts.size(); ++i) {
    if (overlaps(a.facts[i].seq, a.fact_end(i, end_seq), r.lo, r.hi)) out.push_back(i);
  }
  return out;
}

std::vector<EvidenceRef> fact_refs(const AgentTrajectory& a, const std::vector<std::size_t>& ids, const std::string& who,
                                   const Map& map) {
  std::vector<EvidenceRef> out;
  for (auto i : ids) out.push_back({a.facts[i].seq, describe(a.facts[i], who, map.names())});
  return out;
}

struct CoLocation {
  RoomIndex room;
  std::uint64_t seq_a;
  std::uint64_t seq_b;
};

std::vector<CoLocation> co_locations(const TrajectorySet& ts, PlayerId a, PlayerId b, SeqRange r) {
  std::vector<CoLocation> out;
  const auto& ta = ts.of(a);
  const auto& tb = ts.of(b);
  for (auto i : facts_in(ta, r, ts.end_seq)) {
    const auto& fa = ta.facts[i];
    if (fa.kind != OccupancyKind::Room) continue;
    const auto ea = ta.fact_end(i, ts.end_seq);
    for (auto j : facts_in(tb, r, ts.end_seq)) {
      const auto& fb = tb.facts[j];
      if (fb.kind != OccupancyKind::Room || fb.room != fa.room) continue;
      const auto eb = tb.fact_end(j, ts.end_seq);
      const auto lo = std::max({fa.seq, fb.seq, r.lo});
      const auto hi_excl = std::min({ea, eb, r.hi + 1});
      if (lo < hi_excl) out.push_back({fa.room, fa.seq, fb.seq});
    }
  }
  return out;
}

Verdict make(VerdictResult r, std::vector<EvidenceRef> ev, std::string reason) {
  Verdict v;
  v.result = r;
  v.evidence = std::move(ev);
  v.reason = std::move(reason);
  return v;
}

Verdict verify_location(const Claim& c, PlayerId s, const TickWindow& w, const Ctx& x, const VerifierConfig& cfg) {
  const auto& a = x.traj.of(s);
  const auto room = x.map.at(*c.room);
  const auto ids = facts_in(a, x.range, x.traj.end_seq);
  std::vector<std::size_t> hits;
  std::set<RoomIndex> other_rooms;
  for (auto i : ids) {
    const auto& f = a.facts[i];
    if (f.kind != OccupancyKind::Room) continue;
    if (f.room == room) {
      hits.push_back(i);
    } else {
      other_rooms.insert(f.room);
    }
  }
  if (!hits.empty()) {
    if (!w.duration) return make(VerdictResult::True, fact_refs(a, hits, c.subject, x.map), "occupied claimed room");
    int in = 0;
    int total = 0;
    for (int t = w.start; t <= w.end; ++t) {
      const auto& ts = x.traj.tick_seqs.at(static_cast<std::size_t>(t));
      const auto lo = std::max(ts.first, x.range.lo);
      const auto hi = std::min(ts.second, x.range.hi);
      if (lo > hi) continue;
      ++total;
      for (auto i : hits) {
        if (overlaps(a.facts[i].seq, a.fact_end(i, x.traj.end_seq), lo, hi)) {
          ++in;
          break;
        }
      }
    }
    const double frac = total == 0 ? 0.0 : static_cast<double>(in) / total;
    if (frac >= cfg.near_miss_threshold)
      return make(VerdictResult::True, fact_refs(a, hits, c.subject, x.map), "occupied claimed room for the window");
    return make(VerdictResult::NearMiss, fact_refs(a, hits, c.subject, x.map),
                "occupied claimed room on " + std::to_string(in) + " of " + std::to_string(total) + " ticks");
  }
  if (other_rooms.size() == 1) {
    const auto other = *other_rooms.begin();
    std::vector<EvidenceRef> ev;
    for (const auto& list : {a.tasks, a.waits}) {
      for (const auto& act : list) {
        if (act.room == other && act.seq >= x.range.lo && act.seq <= x.range.hi)
          ev.push_back({act.seq, c.subject + " idle or tasking in " + x.map.name(other)});
      }
    }
    if (!ev.empty()) {
      std::sort(ev.begin(), ev.end(), [](const EvidenceRef& l, const EvidenceRef& r) { return l.seq < r.seq; });
      return make(VerdictResult::WrongRoom, std::move(ev), "was in " + x.map.name(other) + " instead");
    }
  }
  return make(VerdictResult::False, fact_refs(a, ids, c.subject, x.map), "never in claimed room");
}

Verdict verify_route(const Claim& c, PlayerId s, const Ctx& x) {
  const auto& a = x.traj.of(s);
  const auto ids = facts_in(a, x.range, x.traj.end_seq);
  std::vector<std::size_t> matched;
  std::size_t k = 0;
  for (auto i : ids) {
    if (k == c.route.size()) break;
    const auto& f = a.facts[i];
    if (f.kind == OccupancyKind::Room && x.map.name(f.room) == c.route[k]) {
      matched.push_back(i);
      ++k;
    }
  }
  if (k == c.route.size()) return make(VerdictResult::True, fact_refs(a, matched, c.subject, x.map), "route occupied in order");
  return make(VerdictResult::False, fact_refs(a, ids, c.subject, x.map), "route not occupied in order");
}

Verdict verify_sighting(const Claim& c, PlayerId s, const Ctx& x, const VerifierConfig& cfg) {
  const auto t = *x.traj.find(*c.target);
  const auto& tt = x.traj.of(t);
  if (tt.death_seq && *tt.death_seq < x.range.lo)
    return make(VerdictResult::False, {{*tt.death_seq, *c.target + " dead"}}, "target was dead before the window");
  const auto room = x.map.at(*c.room);
  std::vector<EvidenceRef> here;
  std::vector<EvidenceRef> elsewhere;
  for (const auto& cl : co_locations(x.traj, s, t, x.range)) {
    auto& dst = cl.room == room ? here : elsewhere;
    dst.push_back({cl.seq_a, c.subject + " in " + x.map.name(cl.room)});
    dst.push_back({cl.seq_b, *c.target + " in " + x.map.name(cl.room)});
  }
  if (cfg.sighting_via_witness) {
    for (const auto& wr : x.traj.of(s).witnessed) {
      if (wr.mover != t || wr.seq < x.range.lo || wr.seq > x.range.hi) continue;
      auto& dst = wr.room == room ? here : elsewhere;
      dst.push_back({wr.seq, c.subject + " saw " + *c.target + (wr.departed ? " depart " : " arrive in ") +
                                 x.map.name(wr.room)});
    }
  }
  if (!here.empty()) return make(VerdictResult::True, std::move(here), "shared the claimed room");
  if (!elsewhere.empty()) return make(VerdictResult::WrongRoom, std::move(elsewhere), "met in a different room");
  const auto& a = x.traj.of(s);
  return make(VerdictResult::False, fact_refs(a, facts_in(a, x.range, x.traj.end_seq), c.subject, x.map),
              "never saw the target");
}

Verdict verify_activity(const Claim& c, PlayerId s, const Ctx& x) {
  const auto& a = x.traj.of(s);
  const auto room = x.map.at(*c.room);
  std::vector<EvidenceRef> here;
  std::vector<EvidenceRef> elsewhere;
  if (*c.activity == ActivityKind::Traveling) {
    const auto ids = facts_in(a, x.range, x.traj.end_seq);
    for (auto i : ids) {
      const auto& f = a.facts[i];
      if (f.kind != OccupancyKind::Corridor) continue;
      auto& dst = (f.room == room || f.to == room) ? here : elsewhere;
      dst.push_back({f.seq, describe(f, c.subject, x.map.names())});
    }
  } else {
    const auto& list = *c.activity == ActivityKind::Task ? a.tasks : a.waits;
    const char* what = *c.activity == ActivityKind::Task ? " tasked in " : " waited in ";
    for (const auto& act : list) {
      if (act.seq < x.range.lo || act.seq > x.range.hi) continue;
      auto& dst = act.room == room ? here : elsewhere;
      dst.push_back({act.seq, c.subject + what + x.map.name(act.room)});
    }
  }
  if (!here.empty()) return make(VerdictResult::True, std::move(here), "activity logged in the claimed room");
  if (!elsewhere.empty()) return make(VerdictResult::WrongRoom, std::move(elsewhere), "activity logged elsewhere");
  return make(VerdictResult::False, fact_refs(a, facts_in(a, x.range, x.traj.end_seq), c.subject, x.map),
              "no such activity in the window");
}

}  // namespace

std::string_view to_string(VerdictResult r) { return kResultNames[static_cast<std::size_t>(r)]; }

VerdictResult verdict_result_from(std::string_view s) {
  for (std::size_t i = 0; i < kResultNames.size(); ++i) {
    if (kResultNames[i] == s) return static_cast<VerdictResult>(i);
  }
  throw Error("unknown verdict '" + std::string(s) + "'");
}

SeqRange seq_range(const TickWindow& w, const Segment& seg, const TrajectorySet& traj) {
  SeqRange r;
  r.lo = std::max(seg.start_seq, traj.tick_seqs.at(static_cast<std::size_t>(w.start)).first);
  r.hi = std::min(seg.end_seq, traj.tick_seqs.at(static_cast<std::size_t>(w.end)).second);
  return r;
}

Verdict verify_claim(const Claim& c, const std::optional<TickWindow>& window, const Segment& seg,
                     const TrajectorySet& traj, const VerifierConfig& cfg) {
  if (c.type == ClaimType::Accusation || c.type == ClaimType::Defense)
    throw Error("accusations and defenses are verified through verify_claims");
  Verdict v;
  const auto subject = traj.find(c.subject);
  if (!window) {
    v = make(VerdictResult::Unverifiable, {}, "unresolvable temporal reference");
  } else if (!subject || (c.target && !traj.find(*c.target))) {
    v = make(VerdictResult::Unverifiable, {}, "unknown player");
  } else {
    const Ctx x{traj, *traj.map, seq_range(*window, seg, traj)};
    const auto& a = traj.of(*subject);
    if (a.death_seq && *a.death_seq < x.range.lo) {
      v = make(VerdictResult::Unverifiable, {}, "subject was dead before the window");
    } else {
      switch (c.type) {
        case ClaimType::Location: v = verify_location(c, *subject, *window, x, cfg); break;
        case ClaimType::Route: v = verify_route(c, *subject, x); break;
        case ClaimType::Sighting: v = verify_sighting(c, *subject, x, cfg); break;
        case ClaimType::Activity: v = verify_activity(c, *subject, x); break;
        default: break;
      }
    }
  }
  v.claim_id = c.id;
  v.window = window;
  return v;
}

GroundingRecord is_grounded(const Claim& c, const Segment& seg, const TrajectorySet& traj,
                            const std::vector<std::pair<Claim, Verdict>>& verified) {
  GroundingRecord g;
  const auto accuser = traj.find(c.subject);
  const auto target = c.target ? traj.find(*c.target) : std::nullopt;
  if (!accuser || !target) return g;
  const auto& map = *traj.map;
  const SeqRange r{seg.start_seq, seg.end_seq};
  for (const auto& cl : co_locations(traj, *accuser, *target, r)) {
    g.co_location.push_back({cl.seq_a, c.subject + " in " + map.name(cl.room)});
    g.co_location.push_back({cl.seq_b, *c.target + " in " + map.name(cl.room)});
  }
  for (const auto& wr : traj.of(*accuser).witnessed) {
    if (wr.mover != *target || wr.seq < r.lo || wr.seq > r.hi) continue;
    g.witnessed.push_back({wr.seq, c.subject + " saw " + *c.target + (wr.departed ? " depart " : " arrive in ") +
                                       map.name(wr.room)});
  }
  for (const auto& [other, verdict] : verified) {
    if (other.meeting != c.meeting || other.speaker != c.subject) continue;
    if (other.type == ClaimType::Accusation || other.type == ClaimType::Defense) continue;
    if (verdict.result != VerdictResult::True) continue;
    if (other.subject == *c.target || other.target == *c.target) g.supporting_claims.push_back(other.id);
  }
  g.grounded = !g.co_location.empty() || !g.witnessed.empty() || !g.supporting_claims.empty();
  return g;
}

std::vector<Verdict> verify_claims(const GameLog& log, const std::vector<Claim>& claims, const VerifierConfig& cfg) {
  const auto traj = reconstruct_trajectories(log);
  const auto meetings = meetings_of(log);
  std::vector<Verdict> out(claims.size());
  std::vector<std::pair<Claim, Verdict>> verified;

  auto segment_for = [&](const Claim& c) -> std::optional<Segment> {
    if (c.meeting < 0 || static_cast<std::size_t>(c.meeting) >= meetings.size()) return std::nullopt;
    return segment_of(log, meetings[static_cast<std::size_t>(c.meeting)]);
  };

  // Spatial claims first; grounding may lean on their verdicts.
  for (std::size_t i = 0; i < claims.size(); ++i) {
    const auto& c = claims[i];
    if (c.type == ClaimType::Accusation || c.type == ClaimType::Defense) continue;
    const auto seg = segment_for(c);
    if (!seg) {
      out[i] = make(VerdictResult::Unverifiable, {}, "claim names no logged meeting");
      out[i].claim_id = c.id;
      continue;
    }
    out[i] = verify_claim(c, resolve_temporal(c.temporal, *seg, cfg.temporal), *seg, traj, cfg);
    verified.emplace_back(c, out[i]);
  }
  for (std::size_t i = 0; i < claims.size(); ++i) {
    const auto& c = claims[i];
    if (c.type != ClaimType::Accusation && c.type != ClaimType::Defense) continue;
    Verdict v = make(VerdictResult::Unverifiable, {}, "judged on the outcome and grounding axes");
    v.claim_id = c.id;
    const auto seg = segment_for(c);
    const auto target = c.target ? traj.find(*c.target) : std::nullopt;
    if (seg && target && traj.find(c.subject)) {
      v.window = TickWindow{seg->start_tick, seg->end_tick, false, "segment"};
      const auto g = is_grounded(c, *seg, traj, verified);
      v.grounded = g.grounded;
      for (const auto& e : g.co_location) v.evidence.push_back(e);
      for (const auto& e : g.witnessed) v.evidence.push_back(e);
      for (const auto& id : g.supporting_claims) v.reason += "; supported by " + id;
      if (c.type == ClaimType::Accusation) v.outcome_correct = traj.roles.at(idx(*target)) == Role::Duck;
    }
    out[i] = std::move(v);
  }
  return out;
}

json Verdict::to_json() const {
  json ev = json::array();
  for (const auto& e : evidence) ev.push_back({e.seq, e.fact});
  json j{{"claim_id", claim_id}, {"result", to_string(result)}, {"evidence", ev}, {"reason", reason}};
  j["window"] = window ? json::array({window->start, window->end}) : json(nullptr);
  if (window && window->duration) j["duration"] = true;
  if (outcome_correct) j["outcome_correct"] = *outcome_correct;
  if (grounded) j["grounded"] = *grounded;
  return j;
}

Verdict Verdict::from_json(const json& d) {
  Verdict v;
  try {
    v.claim_id = d.at("claim_id").get<std::string>();
    v.result = verdict_result_from(d.at("result").get<std::string>());
    for (const auto& e : d.at("evidence")) v.evidence.push_back({e.at(0).get<std::uint64_t>(), e.at(1).get<std::string>()});
    v.reason = d.value("reason", "");
    if (!d.at("window").is_null()) {
      v.window = TickWindow{d["window"].at(0).get<int>(), d["window"].at(1).get<int>(), d.value("duration", false), ""};
    }
    if (d.contains("outcome_correct")) v.outcome_correct = d["outcome_correct"].get<bool>();
    if (d.contains("grounded")) v.grounded = d["grounded"].get<bool>();
  } catch (const json::exception& e) {
    throw Error(std::string("bad verdict record: ") + e.what());
  }
  return v;
}

std::string serialize_verdicts(const std::vector<Verdict>& v) {
  std::string out;
  for (const auto& x : v) out += x.to_json().dump() + "\n";
  return out;
}

std::vector<Verdict> parse_verdicts(std::string_view bytes) {
  std::vector<Verdict> out;
  std::size_t line_no = 0;
  for (const auto& line : split(bytes, '\n')) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      out.push_back(Verdict::from_json(json::parse(line)));
    } catch (const json::parse_error&) {
      throw LogParseError(line_no, "verdicts sidecar: invalid JSON");
    }
  }
  return out;
}

}  // namespace quack
