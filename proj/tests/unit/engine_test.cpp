#include <gtest/gtest.h>

#include <algorithm>

#include "quack/engine.hpp"
#include "quack/error.hpp"
#include "quack/replay.hpp"
#include "testkit.hpp"

namespace quack {
namespace {

constexpr PlayerId P0 = player_at(0), P1 = player_at(1), P2 = player_at(2), P3 = player_at(3);

// Four agents on the line map: a Duck (seat 0) and three Geese, one task each.
GameState line_state() {
  const auto& m = testkit::line_map();
  GameState s;
  for (std::size_t i = 0; i < 4; ++i) {
    AgentState a;
    a.id = player_at(i);
    a.name = "p" + std::to_string(i);
    a.role = i == 0 ? Role::Duck : Role::Goose;
    a.location = m.at("alpha");
    a.tasks.push_back({m.at("alpha"), 0, false});
    s.agents.push_back(a);
  }
  return s;
}

bool has(const std::vector<Action>& v, const Action& a) {
  return std::any_of(v.begin(), v.end(), [&](const Action& x) { return x.same_choice(a); });
}

std::map<PlayerId, Ballot> ballots(std::initializer_list<std::pair<PlayerId, std::optional<PlayerId>>> v) {
  std::map<PlayerId, Ballot> out;
  for (const auto& [voter, target] : v) out[voter] = Ballot{target, {}};
  return out;
}

TEST(Tally, PluralityOverSkips) {
  EXPECT_EQ(tally_votes(ballots({{P0, P1}, {P1, P1}, {P2, std::nullopt}, {P3, P2}})), P1);
  EXPECT_EQ(tally_votes(ballots({{P0, P1}, {P1, P2}, {P2, std::nullopt}, {P3, std::nullopt}})), std::nullopt);
  // Tie between players.
  EXPECT_EQ(tally_votes(ballots({{P0, P1}, {P1, P1}, {P2, P2}, {P3, P2}})), std::nullopt);
  // Ties with skips go to nobody.
  EXPECT_EQ(tally_votes(ballots({{P0, P1}, {P1, P1}, {P2, std::nullopt}, {P3, std::nullopt}})), std::nullopt);
  EXPECT_EQ(tally_votes({}), std::nullopt);
}

TEST(Tally, ValidatedOverloadChecksVoters) {
  auto s = line_state();
  const auto all = ballots({{P0, P1}, {P1, P1}, {P2, P1}, {P3, std::nullopt}});
  EXPECT_EQ(tally_votes(all, s), P1);
  EXPECT_THROW(tally_votes(ballots({{P0, P1}, {P1, P1}, {P2, P1}}), s), RuleError);
  s.agents[3].alive = false;
  EXPECT_THROW(tally_votes(all, s), RuleError);
  EXPECT_THROW(tally_votes(ballots({{P0, P3}, {P1, P1}, {P2, P1}}), s), RuleError);
}

TEST(LegalActions, OrderAndContents) {
  const auto& m = testkit::line_map();
  auto cfg = testkit::line_config(4);
  auto s = line_state();
  const auto acts = legal_actions(s, m, cfg, P1);
  ASSERT_EQ(acts.size(), 4u);
  EXPECT_EQ(acts[0].kind, ActionKind::Wait);
  EXPECT_TRUE(acts[1].same_choice(Action::move(m.at("bravo"))));
  EXPECT_EQ(acts[2].kind, ActionKind::DoTask);
  EXPECT_EQ(acts[3].kind, ActionKind::CallMeeting);
}

TEST(LegalActions, KillNeedsZeroCooldownAndACoLocatedGoose) {
  const auto& m = testkit::line_map();
  const auto cfg = testkit::line_config(4);
  auto s = line_state();
  s.agents[0].cooldown = 1;
  EXPECT_FALSE(has(legal_actions(s, m, cfg, P0), Action::kill(P1)));
  s.agents[0].cooldown = 0;
  EXPECT_TRUE(has(legal_actions(s, m, cfg, P0), Action::kill(P1)));
  EXPECT_FALSE(has(legal_actions(s, m, cfg, P1), Action::kill(P2)));
  s.agents[1].location = m.at("bravo");
  s.agents[2].location = Transit{m.at("alpha"), m.at("bravo"), 1};
  const auto acts = legal_actions(s, m, cfg, P0);
  EXPECT_FALSE(has(acts, Action::kill(P1)));
  EXPECT_FALSE(has(acts, Action::kill(P2)));
  EXPECT_TRUE(has(acts, Action::kill(P3)));
}

TEST(LegalActions, ReportAndMeetingBudget) {
  const auto& m = testkit::line_map();
  auto cfg = testkit::line_config(4);
  auto s = line_state();
  s.agents[3].alive = false;
  s.bodies.push_back({P3, m.at("alpha"), 1});
  EXPECT_TRUE(has(legal_actions(s, m, cfg, P1), Action::report()));
  s.meetings_used = cfg.meeting_budget;
  EXPECT_FALSE(has(legal_actions(s, m, cfg, P1), Action::call_meeting()));
  s.agents[1].location = m.at("bravo");
  const auto acts = legal_actions(s, m, cfg, P1);
  EXPECT_FALSE(has(acts, Action::report()));
  EXPECT_FALSE(has(acts, Action::do_task()));
}

TEST(LegalActions, TransitOnlyWaits) {
  const auto& m = testkit::line_map();
  auto s = line_state();
  s.agents[1].location = Transit{m.at("alpha"), m.at("bravo"), 1};
  const auto acts = legal_actions(s, m, testkit::line_config(4), P1);
  ASSERT_EQ(acts.size(), 1u);
  EXPECT_EQ(acts[0].kind, ActionKind::Wait);
}

TEST(LegalActions, RejectsDeadAgentsAndOtherPhases) {
  const auto& m = testkit::line_map();
  const auto cfg = testkit::line_config(4);
  auto s = line_state();
  s.agents[2].alive = false;
  EXPECT_THROW(legal_actions(s, m, cfg, P2), RuleError);
  EXPECT_THROW(legal_actions(s, m, cfg, player_at(9)), RuleError);
  s.phase = Phase::Voting;
  EXPECT_THROW(legal_actions(s, m, cfg, P1), RuleError);
}

TEST(WinCheck, Priority) {
  const auto cfg = testkit::line_config(4);
  auto s = line_state();
  EXPECT_EQ(check_win(s, cfg), std::nullopt);

  for (auto& a : s.agents) a.tasks[0].done = true;
  EXPECT_EQ(check_win(s, cfg), (Outcome{Team::Geese, WinReason::TasksComplete}));
  // Parity outranks finished tasks.
  s.agents[1].alive = false;
  s.agents[2].alive = false;
  EXPECT_EQ(check_win(s, cfg), (Outcome{Team::Ducks, WinReason::Parity}));
  // No Ducks left outranks parity.
  s.agents[0].alive = false;
  EXPECT_EQ(check_win(s, cfg), (Outcome{Team::Geese, WinReason::AllDucksEjected}));
}

TEST(WinCheck, TimeoutOnlyAtBudget) {
  const auto cfg = testkit::line_config(4);
  auto s = line_state();
  s.tick = cfg.tick_budget - 1;
  EXPECT_EQ(check_win(s, cfg), std::nullopt);
  EXPECT_EQ(check_win_immediate(s), std::nullopt);
  s.tick = cfg.tick_budget;
  EXPECT_EQ(check_win(s, cfg), (Outcome{Team::Geese, WinReason::Timeout}));
  EXPECT_EQ(check_win_immediate(s), std::nullopt);
}

TEST(Game, RejectsBadNames) {
  const auto& m = testkit::line_map();
  auto cfg = testkit::line_config(3);
  EXPECT_THROW(Game(m, cfg, {"a", "a", "b"}), ConfigError);
  EXPECT_THROW(Game(m, cfg, {"a", "skip", "b"}), ConfigError);
  EXPECT_THROW(Game(m, cfg, {"a", "bravo", "b"}), ConfigError);
  EXPECT_THROW(Game(m, cfg, {"a", "b"}), ConfigError);
}

// An action outside the legal set is logged as wait with a note.
class IllegalSource : public DecisionSource {
 public:
  Action choose_action(const GameState&, PlayerId, std::span<const Action>) override {
    return Action::kill(player_at(0));
  }
  Speech speak(const GameState&, PlayerId) override { return {"hi", {}}; }
  Ballot vote(const GameState&, PlayerId) override { return {}; }
};

TEST(Game, IllegalChoiceBecomesWait) {
  auto cfg = testkit::line_config(3);
  cfg.seed = 1;
  Game g(testkit::line_map(), cfg, {"Ann", "Ben", "Cat"});
  IllegalSource src;
  const auto events = g.step_free_roam(src);
  int waits = 0;
  for (const auto& e : events) {
    if (e.kind != EventKind::Waited) continue;
    ++waits;
    EXPECT_EQ(e.payload.value("note", ""), "illegal_action_rejected");
  }
  EXPECT_EQ(waits, 3);
}

TEST(Game, ScriptedGamesTerminateWithinBudget) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto log = testkit::scripted_game(seed);
    ASSERT_TRUE(log.complete());
    EXPECT_LE(log.events().back().tick, log.header().config.tick_budget);
  }
}

TEST(Game, ArrivalsAreWitnessedOnlyByThoseAlreadyThere) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto log = testkit::scripted_game(seed);
    replay_with(log, [](const GameState& s, const Event& e) {
      if (e.kind != EventKind::Arrived) return;
      const auto& t = std::get<Transit>(s.agent(*s.find_player(e.str("player"))).location);
      EXPECT_LE(t.remaining, 1);
      std::vector<std::string> want;
      for (auto q : s.occupants(t.to)) want.push_back(s.agent(q).name);
      EXPECT_EQ(e.payload.at("witnesses").get<std::vector<std::string>>(), want);
    });
  }
}

}  // namespace
}  // namespace quack
