#pragma once

// Shared helpers for the unit and acceptance suites: seeded scripted games,
// brute-force oracles, and hand-built fixture games.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "quack/agents.hpp"
#include "quack/claims.hpp"
#include "quack/cli.hpp"
#include "quack/engine.hpp"
#include "quack/eventlog.hpp"
#include "quack/map.hpp"
#include "quack/metrics.hpp"
#include "quack/rng.hpp"
#include "quack/verifier.hpp"

namespace quack::testkit {

// -- Scripted games --------------------------------------------------------------

GameConfig default_config(std::uint64_t seed);
std::vector<SeatBinding> baseline_seats(std::size_t n = 6);
GameLog scripted_game(std::uint64_t seed, const TickHook& hook = {});

// Engine-side per-tick view, captured through the tick hook.
struct Snapshot {
  int tick = 0;
  nlohmann::json canonical;
  std::vector<OccupancyFact> occupancy;  // seq left at 0
};

struct SnapshotRun {
  GameLog log;
  std::vector<Snapshot> snapshots;
};

SnapshotRun run_with_snapshots(std::uint64_t seed);
// Empty when replay and trajectories agree with every snapshot; otherwise a
// description of the first mismatch.
std::string compare_with_replay(const SnapshotRun& run);
OccupancyFact occupancy_of(const AgentState& a);

// -- Occupancy scan oracle -------------------------------------------------------

struct ScanPos {
  OccupancyKind kind = OccupancyKind::Room;
  RoomIndex room{};
  RoomIndex to{};
  bool operator==(const ScanPos&) const = default;
};

struct ScanAct {
  std::uint64_t seq;
  std::size_t player;
  RoomIndex room;
};

struct ScanWitness {
  std::uint64_t seq;
  std::size_t observer;
  std::size_t mover;
  RoomIndex room;
};

struct ScanSegment {
  int start_tick = 0;
  int end_tick = 0;
  std::uint64_t start_seq = 0;
  std::uint64_t end_seq = 0;
};

// Every agent's position after every event, rebuilt by stepping the replayer
// one event at a time and reading its state.
struct Scan {
  std::vector<std::string> names;
  std::vector<Role> roles;
  std::vector<int> tick;                // per seq
  std::vector<std::vector<ScanPos>> pos;  // [seq][player], after the event
  std::vector<std::optional<std::uint64_t>> death_seq;
  std::vector<ScanAct> tasks;
  std::vector<ScanAct> waits;
  std::vector<ScanWitness> witnessed;
  std::vector<ScanSegment> segments;  // one per meeting

  std::optional<std::size_t> find(const std::string& name) const;
};

Scan scan_log(const GameLog& log);

struct OracleVerdict {
  VerdictResult result = VerdictResult::Unverifiable;
  std::optional<bool> outcome_correct;
  std::optional<bool> grounded;
  bool operator==(const OracleVerdict&) const = default;
};

std::vector<OracleVerdict> oracle_verdicts(const Map& map, const Scan& scan, const std::vector<Claim>& claims);
std::string describe(const OracleVerdict& v);

// Random claims about a finished game, covering every claim type and the
// temporal phrases the resolver knows, plus an unresolvable one.
std::vector<Claim> random_claims(const GameLog& log, const Scan& scan, Rng& rng, int count);

// -- Small oracles ---------------------------------------------------------------

std::optional<PlayerId> brute_force_tally(const std::map<PlayerId, Ballot>& votes);

// Cheapest simple path by exhaustive enumeration; ties go to the
// lexicographically smallest room sequence.
TravelPlan brute_force_path(const Map& map, RoomIndex from, RoomIndex to);

// -- Observation hiding ----------------------------------------------------------

struct SampledState {
  GameState state;
  GameConfig config;
  PlayerId viewer{};
};

// Free-roam states reached at agents' decision points in games with mixed
// scripted seats.
std::vector<SampledState> sample_states(std::uint64_t seed, std::size_t count);

// Names that must not show up in the viewer's serialized observation but do.
std::vector<std::string> hiding_violations(const SampledState& s, const Map& map);

// -- Hand-built fixture games ----------------------------------------------------

// Three rooms in a line: alpha -1- bravo -1- charlie. Tasks only in alpha,
// the emergency button in alpha.
const Map& line_map();

// Small games on the line map: one task each, cooldown 10, 30 ticks.
GameConfig line_config(int n);

// Seats by role: the Duck, then the Geese in seat order.
struct Cast {
  PlayerId duck{};
  std::vector<PlayerId> geese;
  PlayerId goose(std::size_t i) const { return geese.at(i - 1); }  // 1-based
};

Cast cast_of(const GameState& s);

struct FixtureScript {
  GameConfig config;
  std::vector<std::string> names;
  // Accepts the initial state (roles and spawns) of a candidate seed.
  std::function<bool(const GameState&, const Cast&)> accept;
  std::function<Action(const GameState&, const Cast&, PlayerId)> act;
  std::function<std::string(const GameState&, const Cast&, PlayerId)> speak;
  std::function<std::optional<PlayerId>(const GameState&, const Cast&, PlayerId)> vote;
};

// Runs the script on the first seed whose initial state is accepted.
GameLog run_fixture(const FixtureScript& script);

// The fixture games behind the metric hand-checks.
GameLog fixture_tasks();        // two Geese finish their tasks; no kills
GameLog fixture_kill_vote();    // a kill, a report, a wrong ejection, parity
GameLog fixture_emergencies();  // two emergency meetings, one Goose then the Duck ejected
GameLog fixture_timeout();      // one task of two done before the tick budget
GameLog fixture_self_report();  // the Duck reports its own victim

// Next step on the cheapest path toward `dest` (wait when already there or in transit).
Action step_toward(const Map& map, const GameState& s, PlayerId p, RoomIndex dest);

// Claim builders.
Claim location(const std::string& who, const std::string& room, const std::string& temporal);
Claim route(const std::string& who, std::vector<std::string> rooms, const std::string& temporal);
Claim sighting(const std::string& who, const std::string& target, const std::string& room,
               const std::string& temporal);
Claim activity(const std::string& who, ActivityKind kind, const std::string& room, const std::string& temporal);
Claim accusation(const std::string& who, const std::string& target);
Claim defense(const std::string& who, const std::string& target);

}  // namespace quack::testkit
