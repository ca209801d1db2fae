#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "quack/metrics.hpp"

namespace quack {

// A log plus whichever sidecars sit next to it (<stem>.claims, <stem>.verdicts).
struct LoadedGame {
  std::string stem;
  GameLog log;
  std::optional<std::vector<Claim>> claims;
  std::optional<std::vector<Verdict>> verdicts;
};

LoadedGame load_game(const std::filesystem::path& log_path);

// Logs in a directory, sorted by numeric stem where possible, then by name.
std::vector<std::filesystem::path> find_logs(const std::filesystem::path& dir);

enum class Grouping { Setting, ModelRole };
enum class TableFormat { Table, Tsv };

Grouping grouping_from(std::string_view s);    // throws ConfigError
TableFormat format_from(std::string_view s);   // throws ConfigError

// Groups a game belongs to. Setting: the run's setting label. ModelRole: one
// group per side, "goose:<binding>" and "duck:<binding>".
std::vector<std::string> group_keys(const GameLog& log, Grouping g);

GameReport report_game(const LoadedGame& game, const MetricsOptions& opts = {});

// Aggregates per group, groups in first-seen order.
std::vector<AggregateRow> summarize(const std::vector<LoadedGame>& games, const std::vector<GameReport>& reports,
                                    Grouping g);

std::string render_summary(const std::vector<AggregateRow>& rows, TableFormat f);

}  // namespace quack
