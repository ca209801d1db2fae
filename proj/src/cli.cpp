#include "quack/cli.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <set>
#include <thread>

#include <CLI11.hpp>

#include "quack/error.hpp"
#include "quack/observation.hpp"
#include "quack/replay.hpp"
#include "quack/report.hpp"
#include "quack/util.hpp"

namespace quack {

namespace fs = std::filesystem;
using json = nlohmann::json;

SeatBinding SeatBinding::from_json(const json& doc) {
  SeatBinding b;
  if (doc.is_string()) {
    b.goose = b.duck = doc.get<std::string>();
    return b;
  }
  if (!doc.is_object()) throw ConfigError("seat binding: expected a string or {goose, duck}");
  for (const auto& [k, v] : doc.items()) {
    if (k == "goose") {
      b.goose = v.get<std::string>();
    } else if (k == "duck") {
      b.duck = v.get<std::string>();
    } else {
      throw ConfigError("seat binding: unknown field '" + k + "'");
    }
  }
  return b;
}

RunSpec RunSpec::from_json(const json& doc, const std::string& base_dir) {
  if (!doc.is_object()) throw ConfigError("run spec: expected an object");
  RunSpec s;
  std::optional<json> seats;
  try {
    for (const auto& [k, v] : doc.items()) {
      if (k == "map") {
        s.map_path = v.get<std::string>();
        if (!s.map_path.empty() && fs::path(s.map_path).is_relative()) s.map_path = (fs::path(base_dir) / s.map_path).string();
      } else if (k == "config") {
        s.config = GameConfig::from_json(v);
      } else if (k == "names") {
        s.names = v.get<std::vector<std::string>>();
      } else if (k == "seats") {
        seats = v;
      } else if (k == "seeds") {
        s.seeds = v.get<std::vector<std::uint64_t>>();
      } else if (k == "out") {
        s.out_dir = v.get<std::string>();
        if (fs::path(s.out_dir).is_relative()) s.out_dir = (fs::path(base_dir) / s.out_dir).string();
      } else if (k == "setting") {
        s.setting = v.get<std::string>();
      } else if (k == "endpoints") {
        for (const auto& [tag, e] : v.items()) {
          auto ep = EndpointConfig::from_json(e);
          ep.tag = tag;
          s.endpoints[tag] = ep;
        }
      } else if (k == "retries") {
        s.model.retries = v.get<int>();
      } else if (k == "memory_window") {
        s.model.memory_window = v.get<int>();
      } else {
        throw ConfigError("run spec: unknown field '" + k + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("run spec: ") + e.what());
  }
  const auto n = static_cast<std::size_t>(s.config.n_agents);
  if (!seats) {
    s.seats.assign(n, SeatBinding{});
  } else if (seats->is_array()) {
    for (const auto& b : *seats) s.seats.push_back(SeatBinding::from_json(b));
  } else {
    s.seats.assign(n, SeatBinding::from_json(*seats));
  }
  return s;
}

void RunSpec::validate() const {
  config.validate();
  if (seats.size() != static_cast<std::size_t>(config.n_agents)) {
    throw ConfigError("run spec: " + std::to_string(seats.size()) + " seat bindings for " +
                      std::to_string(config.n_agents) + " agents");
  }
  if (seeds.empty()) throw ConfigError("run spec: no seeds");
  std::set<std::uint64_t> seen;
  for (auto s : seeds) {
    if (!seen.insert(s).second) throw ConfigError("run spec: duplicate seed " + std::to_string(s));
  }
  const auto scripted = scripted_policy_names();
  if (model.retries < 0) throw ConfigError("run spec: retries must be >= 0");
  for (const auto& b : seats) {
    for (const auto* name : {&b.goose, &b.duck}) {
      if (name->rfind("model:", 0) == 0) {
        const auto tag = name->substr(6);
        const auto it = endpoints.find(tag);
        if (it == endpoints.end()) throw ConfigError("run spec: no endpoint named '" + tag + "'");
        const char* key = std::getenv(it->second.api_key_env.c_str());
        if (!key || !*key) {
          throw ConfigError("endpoint '" + tag + "': environment variable " + it->second.api_key_env + " is not set");
        }
      } else if (std::find(scripted.begin(), scripted.end(), *name) == scripted.end()) {
        throw ConfigError("run spec: unknown policy '" + *name + "'");
      }
    }
  }
}

GameLog play_game(const Map& map, GameConfig cfg, const std::vector<SeatBinding>& seats,
                  const std::vector<std::string>& names, const std::string& setting, const ClientFactory& clients,
                  const ModelPolicyOptions& model, const TickHook& on_tick_end) {
  Game game(map, cfg, names);
  const auto& s = game.state();
  if (seats.size() != s.agents.size()) throw ConfigError("seat count does not match n_agents");

  std::vector<std::string> players;
  for (const auto& a : s.agents) players.push_back(a.name);

  std::vector<std::unique_ptr<Policy>> policies;
  json labels = json::object();
  bool text_only = false;
  for (std::size_t i = 0; i < s.agents.size(); ++i) {
    const auto& a = s.agents[i];
    SeatContext ctx{&map, cfg, a.name, a.role, players, derive_seed(cfg.seed, 100 + i)};
    const auto& binding = seats[i].for_role(a.role);
    if (binding.rfind("model:", 0) == 0) {
      if (!clients) throw ConfigError("seat " + a.name + " is bound to a model but no client factory was given");
      const auto tag = binding.substr(6);
      policies.push_back(make_model_policy(ctx, clients(tag), tag, model));
      if (!model.vision) text_only = true;
    } else {
      policies.push_back(make_scripted_policy(binding, ctx));
    }
    labels[a.name] = binding;
  }
  auto& meta = game.log().header().meta;
  meta["setting"] = setting;
  meta["seats"] = labels;
  if (text_only) meta["text_only"] = true;

  AgentTable table(map, cfg, std::move(policies));
  game.run(table, on_tick_end);
  return game.log();
}

VerifiedLog verify_structured(const GameLog& log) {
  VerifiedLog out;
  out.claims = extract_log_structured(log, &out.errors);
  out.verdicts = verify_claims(log, out.claims);
  return out;
}

namespace {

// Validation failures exit 1; everything else that escapes exits 2.
struct ValidationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  for (const auto& part : split(text, ',')) {
    const auto p = std::string(trim(part));
    if (p.empty()) continue;
    try {
      const auto dash = p.find('-');
      if (dash != std::string::npos && dash > 0) {
        const auto a = std::stoull(p.substr(0, dash));
        const auto b = std::stoull(p.substr(dash + 1));
        if (b < a) throw ValidationFailure("bad seed range '" + p + "'");
        for (auto s = a; s <= b; ++s) out.push_back(s);
      } else {
        out.push_back(std::stoull(p));
      }
    } catch (const std::invalid_argument&) {
      throw ValidationFailure("bad seed '" + p + "'");
    } catch (const std::out_of_range&) {
      throw ValidationFailure("bad seed '" + p + "'");
    }
  }
  return out;
}

GameLog load_log_checked(const std::string& path) {
  if (!fs::exists(path)) throw ValidationFailure("no such log: " + path);
  try {
    return read_log(path);
  } catch (const LogParseError& e) {
    throw ValidationFailure(path + ": " + e.what());
  } catch (const IncompleteLogError& e) {
    throw ValidationFailure(path + ": " + e.what());
  }
}

int cmd_run(const std::string& spec_path, const std::string& seeds, int jobs) {
  if (!fs::exists(spec_path)) throw ValidationFailure("no such run spec: " + spec_path);
  json doc;
  try {
    doc = json::parse(read_file(spec_path));
  } catch (const json::exception& e) {
    throw ValidationFailure(spec_path + ": " + e.what());
  }
  auto spec = RunSpec::from_json(doc, fs::path(spec_path).parent_path().string());
  if (!seeds.empty()) spec.seeds = parse_seed_list(seeds);
  spec.validate();

  std::unique_ptr<Map> owned;
  const Map* map = &default_map();
  if (!spec.map_path.empty()) {
    owned = std::make_unique<Map>(Map::load_file(spec.map_path));
    map = owned.get();
  }
  spec.config.validate_against(*map);
  fs::create_directories(spec.out_dir);

  ClientFactory clients = [&](const std::string& tag) -> std::shared_ptr<ChatClient> {
    auto ep = spec.endpoints.at(tag);
    return make_http_client(ep);
  };
  auto model = spec.model;
  model.vision = std::any_of(spec.endpoints.begin(), spec.endpoints.end(), [](const auto& e) { return e.second.vision; });

  std::atomic<std::size_t> next{0};
  std::atomic<int> failures{0};
  std::mutex io;
  std::size_t done = 0;
  auto worker = [&] {
    while (true) {
      const auto i = next.fetch_add(1);
      if (i >= spec.seeds.size()) return;
      const auto seed = spec.seeds[i];
      auto cfg = spec.config;
      cfg.seed = seed;
      try {
        const auto log = play_game(*map, cfg, spec.seats, spec.names, spec.setting, clients, model);
        write_log((fs::path(spec.out_dir) / (std::to_string(seed) + ".log")).string(), log);
        const auto& end = log.events().back();
        std::lock_guard lock(io);
        std::cerr << "[" << ++done << "/" << spec.seeds.size() << "] seed " << seed << ": " << end.str("winner")
                  << " (" << end.str("reason") << ") at tick " << end.tick << "\n";
      } catch (const std::exception& e) {
        ++failures;
        std::lock_guard lock(io);
        std::cerr << "[" << ++done << "/" << spec.seeds.size() << "] seed " << seed << ": aborted: " << e.what()
                  << "\n";
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(spec.seeds.size())));
  std::vector<std::thread> pool;
  for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return failures > 0 ? 2 : 0;
}

int cmd_verify(const std::string& path, const std::string& extractor, const std::string& endpoint_path) {
  if (extractor != "structured" && extractor != "model") {
    throw ValidationFailure("unknown extractor '" + extractor + "' (expected structured or model)");
  }
  const auto log = load_log_checked(path);
  replay(log);  // refuses corrupt logs before anything is written

  VerifiedLog v;
  fs::path base(path);
  if (extractor == "structured") {
    v = verify_structured(log);
  } else {
    if (endpoint_path.empty()) throw ValidationFailure("--extractor model needs --endpoint <file>");
    if (!fs::exists(endpoint_path)) throw ValidationFailure("no such endpoint file: " + endpoint_path);
    auto ep = EndpointConfig::from_json(json::parse(read_file(endpoint_path)));
    auto cache_path = base;
    cache_path.replace_extension(".extract-cache");
    auto cache = ExtractionCache::load(cache_path.string());
    const auto before = cache.size();
    // The client (and its credential check) is only built when a cache miss needs it.
    struct LazyClient : ChatClient {
      EndpointConfig ep;
      std::unique_ptr<ChatClient> inner;
      std::string complete(const std::vector<ChatMessage>& m) override {
        if (!inner) inner = make_http_client(ep);
        return inner->complete(m);
      }
      int calls() const override { return inner ? inner->calls() : 0; }
    } lazy;
    lazy.ep = ep;
    v.claims = extract_log_model(log, &lazy, cache, &v.errors);
    v.verdicts = verify_claims(log, v.claims);
    if (cache.size() != before) cache.save(cache_path.string());
    std::cerr << "model calls: " << lazy.calls() << "\n";
  }
  for (const auto& e : v.errors) std::cerr << "skipped: " << e << "\n";

  auto claims_path = base;
  claims_path.replace_extension(".claims");
  auto verdicts_path = base;
  verdicts_path.replace_extension(".verdicts");
  write_file(claims_path.string(), serialize_claims(v.claims));
  write_file(verdicts_path.string(), serialize_verdicts(v.verdicts));

  std::map<std::string, int> by_result;
  for (const auto& x : v.verdicts) ++by_result[std::string(to_string(x.result))];
  std::cout << v.claims.size() << " claims";
  for (const auto& [k, n] : by_result) std::cout << ", " << k << " " << n;
  std::cout << "\n";
  return 0;
}

int cmd_report(const std::string& dir, const std::string& group, const std::string& format) {
  const auto g = grouping_from(group);
  const auto f = format_from(format);
  if (!fs::is_directory(dir)) throw ValidationFailure("no such directory: " + dir);
  const auto paths = find_logs(dir);
  if (paths.empty()) throw ValidationFailure("no .log files in " + dir);

  std::vector<LoadedGame> games;
  std::vector<GameReport> reports;
  int missing = 0;
  for (const auto& p : paths) {
    games.push_back(load_game(p));
    reports.push_back(report_game(games.back()));
    if (!games.back().claims) ++missing;
    auto out = p;
    out.replace_extension(".report.json");
    write_file(out.string(), reports.back().to_json().dump(2) + "\n");
  }
  if (missing > 0) {
    std::cerr << missing << " of " << games.size()
              << " logs have no claims/verdicts sidecars; their statement-verification columns are unavailable "
                 "(run `quack verify` first)\n";
  }
  const auto text = render_summary(summarize(games, reports, g), f);
  write_file((fs::path(dir) / ("summary." + format)).string(), text);
  std::cout << text;
  return 0;
}

int cmd_replay(const std::string& path) {
  const auto log = load_log_checked(path);
  const auto map = map_of(log);
  const auto r = replay(log, true);
  for (std::size_t t = 0; t < r.ticks.size(); ++t) std::cout << t << " " << state_digest(r.ticks[t], map) << "\n";
  const auto& stored = log.events().back().str("digest");
  const auto final_digest = state_digest(r.final_state, map);
  if (stored != final_digest) {
    std::cerr << "final digest " << final_digest << " does not match GameOver digest " << stored << "\n";
    return 2;
  }
  std::cout << "final " << final_digest << " ok\n";
  return 0;
}

int cmd_render(const std::string& path, int tick, const std::string& viewer, const std::string& out_dir) {
  const auto log = load_log_checked(path);
  const auto map = map_of(log);
  const auto r = replay(log, true);
  if (tick < 0 || static_cast<std::size_t>(tick) >= r.ticks.size()) {
    throw ValidationFailure("tick " + std::to_string(tick) + " out of range [0, " +
                            std::to_string(r.ticks.size() - 1) + "]");
  }
  const auto& s = r.ticks[static_cast<std::size_t>(tick)];
  const auto p = s.find_player(viewer);
  if (!p) throw ValidationFailure("unknown player '" + viewer + "'");
  if (!s.agent(*p).alive) throw ValidationFailure(viewer + " is dead at tick " + std::to_string(tick));
  const auto obs = build_observation(s, map, log.header().config, *p);
  fs::create_directories(out_dir);
  const auto stem = (fs::path(out_dir) / (viewer + "_t" + std::to_string(tick))).string();
  write_file(stem + "_global.svg", obs.global_view.svg);
  write_file(stem + "_local.svg", obs.local_view.svg);
  write_file(stem + "_summary.txt", obs.summary.to_text());
  std::cout << stem << "_{global.svg,local.svg,summary.txt}\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"quack: seeded social-deduction games, claim verification and reports"};
  app.require_subcommand(1);

  std::string spec, seeds, log, extractor = "structured", endpoint, dir, group = "setting", format = "table", viewer,
                                out = ".";
  int jobs = 1;
  int tick = 0;

  auto* run = app.add_subcommand("run", "play the games of a run spec");
  run->add_option("--spec", spec, "run spec (JSON)")->required();
  run->add_option("--seeds", seeds, "override seeds: comma list, ranges like 1-30");
  run->add_option("--jobs", jobs, "games in parallel")->check(CLI::PositiveNumber);

  auto* verify = app.add_subcommand("verify", "extract and verify the claims of a log");
  verify->add_option("--log", log, "event log")->required();
  verify->add_option("--extractor", extractor, "structured | model");
  verify->add_option("--endpoint", endpoint, "endpoint config (JSON) for the model extractor");

  auto* report = app.add_subcommand("report", "metrics for every log in a directory");
  report->add_option("--dir", dir, "directory of logs")->required();
  report->add_option("--group", group, "setting | model-role");
  report->add_option("--format", format, "table | tsv");

  auto* rep = app.add_subcommand("replay", "replay a log and print per-tick state digests");
  rep->add_option("--log", log, "event log")->required();

  auto* render = app.add_subcommand("render", "write a player's views at a tick");
  render->add_option("--log", log, "event log")->required();
  render->add_option("--tick", tick, "tick")->required();
  render->add_option("--viewer", viewer, "player name")->required();
  render->add_option("--out", out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*run) return cmd_run(spec, seeds, jobs);
    if (*verify) return cmd_verify(log, extractor, endpoint);
    if (*report) return cmd_report(dir, group, format);
    if (*rep) return cmd_replay(log);
    if (*render) return cmd_render(log, tick, viewer, out);
  } catch (const ValidationFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "failed: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace quack
