#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "quack/claims.hpp"
#include "quack/eventlog.hpp"
#include "quack/verifier.hpp"

namespace quack {

// Exact rate or mean. A zero denominator means "undefined", which is kept
// apart from 0 all the way to the report.
struct Ratio {
  std::int64_t num = 0;
  std::int64_t den = 0;

  std::optional<double> value() const {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  }
  bool operator==(const Ratio&) const = default;
};

struct Tier1Report {
  Team winner = Team::Geese;
  WinReason win_reason = WinReason::Timeout;
  int duration_ticks = 0;
  Ratio task_completion;
  int total_kills = 0;
  std::optional<int> first_kill_tick;
  int meetings_report = 0;
  int meetings_emergency = 0;
  int ejections = 0;
  Ratio ejection_accuracy;
  int survivors = 0;
  int surviving_geese = 0;
  int surviving_ducks = 0;
};

struct Tier2Report {
  Ratio goose_vote_accuracy;
  Ratio goose_skip_rate;
  Ratio report_latency;       // sum of ticks / bodies reported
  Ratio task_efficiency;
  Ratio spatial_coverage_geese;
  Ratio spatial_coverage_ducks;
  Ratio kill_rate;
  Ratio cooldown_utilization;
  Ratio self_report_rate;
  Ratio post_kill_displacement;
};

struct VerdictCounts {
  int true_ = 0;
  int false_ = 0;
  int wrong_room = 0;
  int near_miss = 0;
  int unverifiable = 0;
  int verifiable() const { return true_ + false_ + wrong_room + near_miss; }
};

struct Tier3Report {
  Ratio goose_truthfulness;
  Ratio duck_truthfulness;
  Ratio spatial_hallucination_rate;
  Ratio deception_rate;
  Ratio deception_sophistication;
  Ratio accusation_accuracy;
  Ratio unsupported_accusation_rate;
  Ratio lie_detection_rate;
  VerdictCounts goose_spatial;  // Location/Route/Sighting/Activity
  VerdictCounts duck_spatial;
  std::map<std::string, int> claim_distribution;  // by claim type
};

struct MetricsOptions {
  bool per_tick_opportunities = false;  // cooldown: count ticks instead of windows
  bool routes_in_hallucination = true;
  bool crew_accusations_only = true;    // accusation axes over Goose accusers
};

// Throws IncompleteLogError when the log has no GameOver.
Tier1Report tier1(const GameLog& log);
Tier2Report tier2(const GameLog& log, const MetricsOptions& opts = {});
// Throws ConfigError when a claim has no verdict.
Tier3Report tier3(const GameLog& log, const std::vector<Claim>& claims, const std::vector<Verdict>& verdicts,
                  const MetricsOptions& opts = {});

// One game's reports, flattened for aggregation.
struct GameReport {
  std::string game;  // seed or file stem
  std::string group;
  Tier1Report t1;
  Tier2Report t2;
  std::optional<Tier3Report> t3;  // absent without sidecars

  // Numeric metrics in a fixed order; nullopt marks undefined values.
  std::vector<std::pair<std::string, std::optional<double>>> values() const;
  nlohmann::json to_json() const;
};

// Names of every numeric column produced by GameReport::values, in order.
const std::vector<std::string>& metric_columns();
// Columns that need verdict sidecars.
bool is_tier3_column(const std::string& name);

struct AggregateCell {
  std::optional<double> mean;
  int defined = 0;  // games contributing
  int games = 0;
};

struct AggregateRow {
  std::string group;
  int games = 0;
  int games_with_tier3 = 0;
  std::vector<std::pair<std::string, AggregateCell>> cells;
};

// Unweighted mean over games where the metric is defined. Throws ConfigError
// for an empty group.
AggregateRow aggregate(const std::string& group, const std::vector<GameReport>& reports);

}  // namespace quack
