#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "quack/agents.hpp"
#include "quack/chat_client.hpp"
#include "quack/model_policy.hpp"
#include "quack/verifier.hpp"

namespace quack {

// Policy per role for one seat. A binding is a scripted policy name or
// "model:<endpoint tag>".
struct SeatBinding {
  std::string goose = "task_goose";
  std::string duck = "stalker_duck";

  const std::string& for_role(Role r) const { return r == Role::Duck ? duck : goose; }
  // Accepts a plain string (both roles) or {"goose": ..., "duck": ...}.
  static SeatBinding from_json(const nlohmann::json& doc);
};

struct RunSpec {
  std::string map_path;  // empty = bundled default map
  GameConfig config;
  std::vector<std::string> names;  // empty = default names
  std::vector<SeatBinding> seats;  // one per seat
  std::vector<std::uint64_t> seeds;
  std::string out_dir = "out";
  std::string setting = "default";
  std::map<std::string, EndpointConfig> endpoints;
  ModelPolicyOptions model;

  // Relative paths resolve against `base_dir`. Throws ConfigError.
  static RunSpec from_json(const nlohmann::json& doc, const std::string& base_dir = ".");
  void validate() const;
};

using ClientFactory = std::function<std::shared_ptr<ChatClient>(const std::string& tag)>;

// One game: roles are drawn, policies bound to seats by role, then the game
// runs to completion. The header meta records the setting and seat labels.
GameLog play_game(const Map& map, GameConfig cfg, const std::vector<SeatBinding>& seats,
                  const std::vector<std::string>& names = {}, const std::string& setting = "default",
                  const ClientFactory& clients = {}, const ModelPolicyOptions& model = {},
                  const TickHook& on_tick_end = {});

// Structured-channel claims and verdicts for a log.
struct VerifiedLog {
  std::vector<Claim> claims;
  std::vector<Verdict> verdicts;
  std::vector<std::string> errors;
};
VerifiedLog verify_structured(const GameLog& log);

// Entry point of the `quack` executable. Returns the process exit status:
// 0 success, 1 validation error, 2 runtime failure.
int run_cli(int argc, const char* const* argv);

}  // namespace quack
