#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "quack/eventlog.hpp"
#include "quack/map.hpp"
#include "quack/state.hpp"

namespace quack {

// Event-sourced reconstruction of GameState. Applies events one at a time
// without any randomness or policy; every event is checked for legality in
// the state rebuilt so far and rejected with ReplayError (carrying the seq)
// when it does not fit.
class Replayer {
 public:
  Replayer(const Map& map, const LogHeader& header);

  void apply(const Event& e);
  const GameState& state() const { return state_; }

 private:
  PlayerId player(const Event& e, const char* key) const;
  RoomIndex room(const Event& e, const char* key) const;
  std::vector<PlayerId> player_list(const Event& e, const char* key) const;
  std::vector<PlayerId> witnesses_in(RoomIndex r, PlayerId except) const;
  void begin_tick(const Event& e);
  void expect_phase(const Event& e, Phase p) const;
  void apply_prelude(const Event& e);
  void apply_action(const Event& e);
  void apply_meeting(const Event& e);

  const Map* map_;
  GameConfig config_;
  std::vector<std::string> players_;
  GameState state_;
  bool started_ = false;
  std::optional<MeetingTrigger> pending_trigger_;
  std::uint64_t pending_trigger_seq_ = 0;
  // Transit and cooldown events still owed at the start of this tick, in order.
  std::vector<std::pair<EventKind, PlayerId>> prelude_;
  std::vector<bool> acted_;
  std::size_t next_utterance_ = 0;
};

struct ReplayResult {
  GameState final_state;
  std::vector<GameState> ticks;  // state after the last event of each tick
};

// Replays a complete log. Per-tick states are collected when `keep_ticks`.
ReplayResult replay(const GameLog& log, bool keep_ticks = false);

// Replays while invoking `before` ahead of each event with the state it will
// be applied to.
GameState replay_with(const GameLog& log, const std::function<void(const GameState&, const Event&)>& before);

}  // namespace quack
