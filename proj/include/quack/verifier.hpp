#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "quack/claims.hpp"
#include "quack/eventlog.hpp"

namespace quack {

// -- Trajectories ----------------------------------------------------------------

enum class OccupancyKind { Room, Corridor, Dead };

// Where an agent was from `seq` until the next fact begins.
struct OccupancyFact {
  OccupancyKind kind = OccupancyKind::Room;
  RoomIndex room{};  // the room, or the corridor's origin
  RoomIndex to{};    // corridor destination
  std::uint64_t seq = 0;
  int tick = 0;
  bool operator==(const OccupancyFact&) const = default;
};

struct LoggedAct {
  std::uint64_t seq = 0;
  int tick = 0;
  RoomIndex room{};
};

struct WitnessRecord {
  std::uint64_t seq = 0;
  int tick = 0;
  PlayerId mover{};
  RoomIndex room{};
  bool departed = false;
};

struct AgentTrajectory {
  std::vector<OccupancyFact> facts;    // ordered by seq; the first starts at GameStart
  std::vector<LoggedAct> tasks;        // TaskProgressed
  std::vector<LoggedAct> waits;        // Waited in a room
  std::vector<WitnessRecord> witnessed;  // movements this agent saw
  std::optional<std::uint64_t> death_seq;
  std::optional<int> death_tick;

  // Fact index holding at `seq`.
  std::size_t fact_at(std::uint64_t seq) const;
  // Half-open seq interval of fact i; the last fact ends at `end_seq` + 1.
  std::uint64_t fact_end(std::size_t i, std::uint64_t end_seq) const;
};

struct TrajectorySet {
  std::shared_ptr<const Map> map;
  std::vector<std::string> names;
  std::vector<Role> roles;
  std::vector<AgentTrajectory> agents;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> tick_seqs;  // tick -> [first, last] seq
  std::uint64_t end_seq = 0;
  int final_tick = 0;

  std::optional<PlayerId> find(std::string_view name) const;
  const AgentTrajectory& of(PlayerId p) const { return agents.at(idx(p)); }
  // Occupancy at the end of `tick` (after its last event).
  const OccupancyFact& at_tick_end(PlayerId p, int tick) const;
};

// Pure fold over the log's events. Corrupt logs are rejected by replay first.
TrajectorySet reconstruct_trajectories(const GameLog& log);

// -- Verdicts --------------------------------------------------------------------

enum class VerdictResult { True, False, WrongRoom, NearMiss, Unverifiable };
std::string_view to_string(VerdictResult r);
VerdictResult verdict_result_from(std::string_view s);

// A pointer into the log: an event seq, with what it shows.
struct EvidenceRef {
  std::uint64_t seq = 0;
  std::string fact;
  bool operator==(const EvidenceRef&) const = default;
};

struct Verdict {
  std::string claim_id;
  VerdictResult result = VerdictResult::Unverifiable;
  std::vector<EvidenceRef> evidence;
  std::optional<TickWindow> window;
  std::optional<bool> outcome_correct;  // Accusation only
  std::optional<bool> grounded;         // Accusation and Defense
  std::string reason;

  nlohmann::json to_json() const;
  static Verdict from_json(const nlohmann::json& doc);
};

struct VerifierConfig {
  TemporalRules temporal;
  double near_miss_threshold = 0.8;
  bool sighting_via_witness = true;
};

// The seq range a tick window covers inside a segment.
struct SeqRange {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
};
SeqRange seq_range(const TickWindow& w, const Segment& seg, const TrajectorySet& traj);

struct GroundingRecord {
  bool grounded = false;
  std::vector<EvidenceRef> co_location;
  std::vector<EvidenceRef> witnessed;
  std::vector<std::string> supporting_claims;
};

// `verified` holds the other claims of the same meeting with their verdicts.
GroundingRecord is_grounded(const Claim& c, const Segment& seg, const TrajectorySet& traj,
                            const std::vector<std::pair<Claim, Verdict>>& verified);

// Verifies one non-accusation claim. Accusation/Defense go through
// verify_claims so grounding can see the rest of the meeting.
Verdict verify_claim(const Claim& c, const std::optional<TickWindow>& window, const Segment& seg,
                     const TrajectorySet& traj, const VerifierConfig& cfg = {});

// Verifies every claim of a log, in order.
std::vector<Verdict> verify_claims(const GameLog& log, const std::vector<Claim>& claims,
                                   const VerifierConfig& cfg = {});

std::string serialize_verdicts(const std::vector<Verdict>& v);
std::vector<Verdict> parse_verdicts(std::string_view bytes);

}  // namespace quack
