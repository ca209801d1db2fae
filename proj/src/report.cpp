#include "quack/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "quack/error.hpp"
#include "quack/util.hpp"

namespace quack {

namespace fs = std::filesystem;

LoadedGame load_game(const fs::path& log_path) {
  LoadedGame g;
  g.stem = log_path.stem().string();
  g.log = read_log(log_path.string());
  auto side = log_path;
  side.replace_extension(".claims");
  const bool has_claims = fs::exists(side);
  auto vside = log_path;
  vside.replace_extension(".verdicts");
  const bool has_verdicts = fs::exists(vside);
  if (has_claims && has_verdicts) {
    g.claims = parse_claims(read_file(side.string()));
    g.verdicts = parse_verdicts(read_file(vside.string()));
  }
  return g;
}

std::vector<fs::path> find_logs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".log") out.push_back(e.path());
  }
  auto key = [](const fs::path& p) {
    const auto s = p.stem().string();
    const bool numeric = !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
    return std::make_tuple(!numeric, numeric ? s.size() : 0, s);
  };
  std::sort(out.begin(), out.end(), [&](const fs::path& a, const fs::path& b) { return key(a) < key(b); });
  return out;
}

Grouping grouping_from(std::string_view s) {
  if (s == "setting") return Grouping::Setting;
  if (s == "model-role") return Grouping::ModelRole;
  throw ConfigError("unknown grouping '" + std::string(s) + "' (expected setting or model-role)");
}

TableFormat format_from(std::string_view s) {
  if (s == "table") return TableFormat::Table;
  if (s == "tsv") return TableFormat::Tsv;
  throw ConfigError("unknown format '" + std::string(s) + "' (expected table or tsv)");
}

std::vector<std::string> group_keys(const GameLog& log, Grouping g) {
  const auto& meta = log.header().meta;
  if (g == Grouping::Setting) {
    if (meta.contains("setting") && meta["setting"].is_string()) return {meta["setting"].get<std::string>()};
    return {"default"};
  }
  const auto roles = roles_of(log);
  const auto& players = log.header().players;
  std::set<std::string> goose, duck;
  for (std::size_t i = 0; i < players.size(); ++i) {
    std::string label = "unknown";
    if (meta.contains("seats") && meta["seats"].contains(players[i])) label = meta["seats"][players[i]].get<std::string>();
    (roles[i] == Role::Duck ? duck : goose).insert(label);
  }
  std::vector<std::string> out;
  for (const auto& l : goose) out.push_back("goose:" + l);
  for (const auto& l : duck) out.push_back("duck:" + l);
  return out;
}

GameReport report_game(const LoadedGame& game, const MetricsOptions& opts) {
  GameReport r;
  r.game = game.stem;
  r.t1 = tier1(game.log);
  r.t2 = tier2(game.log, opts);
  if (game.claims && game.verdicts) r.t3 = tier3(game.log, *game.claims, *game.verdicts, opts);
  return r;
}

std::vector<AggregateRow> summarize(const std::vector<LoadedGame>& games, const std::vector<GameReport>& reports,
                                    Grouping g) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<GameReport>> groups;
  for (std::size_t i = 0; i < games.size(); ++i) {
    for (const auto& k : group_keys(games[i].log, g)) {
      if (!groups.count(k)) order.push_back(k);
      auto r = reports.at(i);
      r.group = k;
      groups[k].push_back(std::move(r));
    }
  }
  std::vector<AggregateRow> rows;
  for (const auto& k : order) rows.push_back(aggregate(k, groups[k]));
  return rows;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string cell_text(const AggregateRow& row, const std::string& col, const AggregateCell& c, bool annotate) {
  if (is_tier3_column(col) && row.games_with_tier3 == 0) return "unavailable";
  if (!c.mean) return "null";
  std::string s = fmt(*c.mean);
  const int pool = is_tier3_column(col) ? row.games_with_tier3 : row.games;
  if (annotate && c.defined != pool) s += " (" + std::to_string(c.defined) + "/" + std::to_string(pool) + ")";
  return s;
}

}  // namespace

std::string render_summary(const std::vector<AggregateRow>& rows, TableFormat f) {
  std::ostringstream o;
  const auto& cols = metric_columns();
  if (f == TableFormat::Tsv) {
    o << "group\tgames\tgames_tier3";
    for (const auto& c : cols) o << "\t" << c;
    o << "\n";
    for (const auto& r : rows) {
      o << r.group << "\t" << r.games << "\t" << r.games_with_tier3;
      for (const auto& [name, cell] : r.cells) o << "\t" << cell_text(r, name, cell, false);
      o << "\n";
    }
    return o.str();
  }

  // Metrics down, groups across.
  std::vector<std::vector<std::string>> grid;
  grid.push_back({"metric"});
  for (const auto& r : rows) grid[0].push_back(r.group);
  grid.push_back({"games"});
  for (const auto& r : rows) grid[1].push_back(std::to_string(r.games));
  for (std::size_t i = 0; i < cols.size(); ++i) {
    std::vector<std::string> line{cols[i]};
    for (const auto& r : rows) line.push_back(cell_text(r, cols[i], r.cells[i].second, true));
    grid.push_back(std::move(line));
  }
  std::vector<std::size_t> width(grid[0].size(), 0);
  for (const auto& line : grid) {
    for (std::size_t j = 0; j < line.size(); ++j) width[j] = std::max(width[j], line[j].size());
  }
  auto rule = [&] {
    for (std::size_t j = 0; j < width.size(); ++j) o << (j ? "-+-" : "") << std::string(width[j], '-');
    o << "\n";
  };
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = 0; j < grid[i].size(); ++j) {
      const auto& s = grid[i][j];
      o << (j ? " | " : "") << s << std::string(width[j] - s.size(), ' ');
    }
    o << "\n";
    if (i == 1) rule();
  }
  return o.str();
}

}  // namespace quack
