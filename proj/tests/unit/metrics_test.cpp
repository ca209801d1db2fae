#include <gtest/gtest.h>

#include "quack/error.hpp"
#include "quack/metrics.hpp"
#include "quack/report.hpp"
#include "testkit.hpp"

namespace quack {
namespace {

TEST(Ratio, ZeroDenominatorIsUndefined) {
  EXPECT_FALSE((Ratio{0, 0}.value()));
  EXPECT_EQ((Ratio{0, 4}.value()), 0.0);
  EXPECT_EQ((Ratio{3, 4}.value()), 0.75);
}

TEST(Metrics, TierOneMatchesTheLog) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto log = testkit::scripted_game(seed);
    const auto t1 = tier1(log);
    const auto& end = log.events().back();
    EXPECT_EQ(t1.duration_ticks, end.tick);
    EXPECT_EQ(to_string(t1.winner), end.str("winner"));
    EXPECT_EQ(t1.surviving_geese + t1.surviving_ducks, t1.survivors);
    int kills = 0;
    for (const auto& e : log.events()) kills += e.kind == EventKind::Killed;
    EXPECT_EQ(t1.total_kills, kills);
    EXPECT_EQ(t1.meetings_report + t1.meetings_emergency, static_cast<int>(meetings_of(log).size()));
    EXPECT_LE(t1.ejection_accuracy.num, t1.ejection_accuracy.den);
    EXPECT_EQ(t1.ejection_accuracy.den, t1.ejections);
  }
}

TEST(Metrics, RatesStayInRange) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto log = testkit::scripted_game(seed);
    const auto t2 = tier2(log);
    for (const auto* r : {&t2.goose_vote_accuracy, &t2.goose_skip_rate, &t2.task_efficiency, &t2.cooldown_utilization,
                          &t2.self_report_rate}) {
      if (r->den) EXPECT_LE(r->num, r->den);
    }
    const auto per_tick = tier2(log, {.per_tick_opportunities = true});
    EXPECT_GE(per_tick.cooldown_utilization.den, t2.cooldown_utilization.den);
  }
}

TEST(Metrics, TierThreeNeedsAVerdictPerClaim) {
  const auto log = testkit::fixture_kill_vote();
  auto v = verify_structured(log);
  ASSERT_FALSE(v.claims.empty());
  EXPECT_NO_THROW(tier3(log, v.claims, v.verdicts));
  v.verdicts.pop_back();
  EXPECT_THROW(tier3(log, v.claims, v.verdicts), ConfigError);
}

TEST(Metrics, IncompleteLogIsRejected) {
  auto log = testkit::scripted_game(1);
  GameLog cut(log.header());
  for (std::size_t i = 0; i + 1 < log.events().size(); ++i) cut.append(log.events()[i]);
  EXPECT_THROW(tier1(cut), IncompleteLogError);
}

TEST(Report, ColumnsLineUp) {
  LoadedGame g{"7", testkit::scripted_game(7), std::nullopt, std::nullopt};
  const auto r = report_game(g);
  const auto vals = r.values();
  ASSERT_EQ(vals.size(), metric_columns().size());
  for (std::size_t i = 0; i < vals.size(); ++i) {
    EXPECT_EQ(vals[i].first, metric_columns()[i]);
    if (is_tier3_column(vals[i].first)) EXPECT_FALSE(vals[i].second) << vals[i].first;
  }
  EXPECT_FALSE(r.t3);
}

TEST(Report, AggregateSkipsUndefinedValues) {
  std::vector<GameReport> reports;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    LoadedGame g{std::to_string(seed), testkit::scripted_game(seed), std::nullopt, std::nullopt};
    reports.push_back(report_game(g));
  }
  const auto row = aggregate("all", reports);
  EXPECT_EQ(row.games, 10);
  EXPECT_EQ(row.games_with_tier3, 0);
  for (const auto& [name, cell] : row.cells) {
    EXPECT_EQ(cell.games, 10);
    EXPECT_LE(cell.defined, cell.games);
    EXPECT_EQ(cell.mean.has_value(), cell.defined > 0) << name;
  }
  EXPECT_THROW(aggregate("none", {}), ConfigError);
}

TEST(Report, GroupKeys) {
  const auto log = testkit::scripted_game(2);
  EXPECT_EQ(group_keys(log, Grouping::Setting), std::vector<std::string>{"default"});
  const auto byrole = group_keys(log, Grouping::ModelRole);
  ASSERT_EQ(byrole.size(), 2u);
  EXPECT_EQ(byrole[0].rfind("goose:", 0), 0u);
  EXPECT_EQ(byrole[1].rfind("duck:", 0), 0u);
  EXPECT_THROW(grouping_from("colour"), ConfigError);
  EXPECT_THROW(format_from("xml"), ConfigError);
}

}  // namespace
}  // namespace quack
