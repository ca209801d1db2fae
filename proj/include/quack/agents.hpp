#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "quack/engine.hpp"
#include "quack/observation.hpp"

namespace quack {

// -- Memory ----------------------------------------------------------------------

struct PlaceRecord {
  int tick = 0;
  int segment = 0;  // meetings concluded before this fact
  std::string room;  // empty while in a corridor
  std::string corridor_from;
  std::string corridor_to;
  bool operator==(const PlaceRecord&) const = default;
};

struct MoveRecord {
  int tick = 0;
  int segment = 0;  // meetings concluded before this fact
  std::string player;
  bool departed = false;
  std::string room;
  std::string other;
  bool operator==(const MoveRecord&) const = default;
};

struct EncounterRecord {
  int tick = 0;
  int segment = 0;  // meetings concluded before this fact
  std::string room;
  std::vector<std::string> players;
  std::vector<std::string> bodies;
};

struct ChatRecord {
  int tick = 0;
  int segment = 0;  // meetings concluded before this fact
  std::string room;
  std::string speaker;
  std::string text;
};

struct ActionRecord {
  int tick = 0;
  int segment = 0;  // meetings concluded before this fact
  std::string action;  // format_action text
  std::string room;    // where it was taken; empty in transit
};

struct MeetingMemory {
  int tick = 0;
  std::string reason;
  std::string caller;
  std::vector<std::string> victims;
  std::vector<SpokenLine> transcript;
  std::string result;  // empty until the outcome is seen
};

// Everything an agent has perceived, oldest first. Append-only: entries are
// never rewritten except to fill a meeting's result once it is announced.
struct AgentMemory {
  std::string self;
  std::vector<PlaceRecord> places;
  std::vector<MoveRecord> moves;
  std::vector<EncounterRecord> encounters;
  std::vector<ChatRecord> chat;
  std::vector<ActionRecord> actions;
  std::vector<MeetingMemory> meetings;

  // Index of the free-roam stretch in progress (concluded meetings so far).
  int segment() const;

  // Chronological plain-text digest. `window` > 0 keeps only the last
  // `window` ticks of spatial facts; meetings are always kept.
  std::string digest(int window = 0) const;
};

// Folds one observation into memory. Repeated calls with the same tick are
// idempotent for spatial facts.
void update_memory(AgentMemory& m, const StructuredSummary& obs);
inline void update_memory(AgentMemory& m, const Observation& obs) { update_memory(m, obs.summary); }
void record_action(AgentMemory& m, int tick, const std::string& action, const std::string& room);

// -- Policies --------------------------------------------------------------------

struct VoteChoice {
  std::optional<std::string> target;  // player name; nullopt = skip
  std::string note;
};

struct Utterance {
  std::string text;
  std::string note;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual Action act(const Observation& obs, const AgentMemory& mem, std::span<const Action> legal) = 0;
  virtual Utterance speak(const Observation& obs, const AgentMemory& mem) = 0;
  virtual VoteChoice vote(const Observation& obs, const AgentMemory& mem) = 0;
  // Whether act/speak/vote read the rendered views.
  virtual bool wants_views() const { return false; }
  virtual std::string label() const = 0;
};

// Everything a policy is built from: the seat, the map, and a seed stream
// derived from the game seed.
struct SeatContext {
  const Map* map = nullptr;
  GameConfig config;
  std::string name;
  Role role = Role::Goose;
  std::vector<std::string> players;
  std::uint64_t seed = 0;
};

using PolicyFactory = std::function<std::unique_ptr<Policy>(const SeatContext&)>;

// Names accepted by make_scripted_policy.
std::vector<std::string> scripted_policy_names();
// Throws ConfigError for an unknown name.
std::unique_ptr<Policy> make_scripted_policy(const std::string& name, const SeatContext& ctx);

// Adapts per-seat policies to the engine. Builds observations, keeps memory,
// and turns names back into ids.
class AgentTable : public DecisionSource {
 public:
  AgentTable(const Map& map, const GameConfig& cfg, std::vector<std::unique_ptr<Policy>> seats);

  Action choose_action(const GameState& s, PlayerId agent, std::span<const Action> legal) override;
  Speech speak(const GameState& s, PlayerId agent) override;
  Ballot vote(const GameState& s, PlayerId agent) override;
  void observe(const GameState& s, PlayerId agent) override;

  const AgentMemory& memory(PlayerId p) const { return memories_.at(idx(p)); }
  Policy& policy(PlayerId p) { return *seats_.at(idx(p)); }

 private:
  Observation observe_for(const GameState& s, PlayerId p);

  const Map* map_;
  GameConfig cfg_;
  std::vector<std::unique_ptr<Policy>> seats_;
  std::vector<AgentMemory> memories_;
};

// -- Reply parsing ---------------------------------------------------------------

// Free-roam reply: exactly one action token with an optional " | say(...)"
// suffix. Throws ResponseError; the result is checked against `legal`.
Action parse_action_reply(std::string_view text, const Map& map, const std::vector<std::string>& players,
                          std::span<const Action> legal);
// Vote reply: a living player's exact name or "skip". Throws ResponseError.
std::optional<std::string> parse_vote_reply(std::string_view text, const std::vector<std::string>& living);
// Discussion reply: passed through with surrounding whitespace removed.
std::string parse_utterance_reply(std::string_view text);

}  // namespace quack
