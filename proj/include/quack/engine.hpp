#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "quack/eventlog.hpp"
#include "quack/map.hpp"
#include "quack/rng.hpp"
#include "quack/state.hpp"

namespace quack {

struct Speech {
  std::string text;
  std::string note;  // non-empty when a fallback produced this utterance
};

// Where the engine gets decisions from. Calls are strictly sequential; the
// engine waits for each answer before asking the next agent.
class DecisionSource {
 public:
  virtual ~DecisionSource() = default;

  // Free roam. `legal` is the engine's legal set; returning anything outside
  // it is rejected and replaced by wait.
  virtual Action choose_action(const GameState& s, PlayerId agent, std::span<const Action> legal) = 0;
  // Discussion. state.meeting holds the transcript so far.
  virtual Speech speak(const GameState& s, PlayerId agent) = 0;
  // Voting. Ballots are collected before any is revealed.
  virtual Ballot vote(const GameState& s, PlayerId agent) = 0;
  // Called for each survivor once the meeting outcome is known (Ejection phase).
  virtual void observe(const GameState& /*s*/, PlayerId /*agent*/) {}
};

// Plurality rule: the unique player with strictly more votes than every other
// player and strictly more than the skip count is ejected; otherwise nobody.
std::optional<PlayerId> tally_votes(const std::map<PlayerId, Ballot>& votes);

// Same, but first checks that the voters are exactly the living players and
// every target is living. Throws RuleError otherwise.
std::optional<PlayerId> tally_votes(const std::map<PlayerId, Ballot>& votes, const GameState& s);

// Termination check, including the tick-budget timeout.
std::optional<Outcome> check_win(const GameState& s, const GameConfig& cfg);
// Termination check without the timeout clause (used mid-tick).
std::optional<Outcome> check_win_immediate(const GameState& s);

// Legal free-roam actions, ordered: wait, moves (by room), do_task, report,
// call_meeting, kills (by player). Throws RuleError for dead/unknown agents or
// outside free roam.
std::vector<Action> legal_actions(const GameState& s, const Map& map, const GameConfig& cfg, PlayerId agent);

using TickHook = std::function<void(const GameState&)>;

// One game instance. Construction is new_game: roles, tasks and spawn rooms
// are drawn from the seeded generator and logged.
class Game {
 public:
  Game(const Map& map, GameConfig config, std::vector<std::string> names = {});

  const GameState& state() const { return state_; }
  const GameLog& log() const { return log_; }
  GameLog& log() { return log_; }
  const Map& map() const { return *map_; }
  const GameConfig& config() const { return config_; }
  const std::vector<MeetingRecord>& meetings() const { return meetings_; }
  bool over() const { return state_.phase == Phase::GameOver; }

  std::vector<Action> legal_actions(PlayerId agent) const {
    return quack::legal_actions(state_, *map_, config_, agent);
  }

  // Ends the game immediately if a win condition already holds (e.g. parity
  // at start). Returns true when the game is over.
  bool settle();

  // One free-roam tick. Returns the events emitted.
  std::vector<Event> step_free_roam(DecisionSource& src);
  // Discussion, voting, ejection and (if the game continues) respawn.
  MeetingRecord run_meeting(DecisionSource& src);

  // Alternates free roam and meetings until GameOver. `on_tick_end` sees the
  // state after the last event of every tick (including tick 0).
  const GameLog& run(DecisionSource& src, const TickHook& on_tick_end = {});

 private:
  void emit(EventKind kind, nlohmann::json payload);
  void apply_action(PlayerId p, Action a);
  void start_meeting(MeetingTrigger trigger);
  void finish(Outcome o);
  nlohmann::json room_json(RoomIndex r) const { return map_->name(r); }
  nlohmann::json player_json(PlayerId p) const { return state_.agent(p).name; }

  const Map* map_;
  GameConfig config_;
  Rng rng_;
  GameState state_;
  GameLog log_;
  std::vector<MeetingRecord> meetings_;
  std::vector<Event>* sink_ = nullptr;
};

GameLog run_game(const Map& map, const GameConfig& config, DecisionSource& src,
                 const TickHook& on_tick_end = {});

}  // namespace quack
