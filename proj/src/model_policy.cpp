#include "quack/model_policy.hpp"

#include <algorithm>

#include "quack/assets.hpp"
#include "quack/error.hpp"

namespace quack {

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : ", ") + s;
  return out;
}

class ModelPolicy : public Policy {
 public:
  ModelPolicy(const SeatContext& ctx, std::shared_ptr<ChatClient> client, std::string tag, ModelPolicyOptions opts)
      : ctx_(ctx), client_(std::move(client)), tag_(std::move(tag)), opts_(opts) {
    if (!client_) throw ConfigError("model seat '" + ctx.name + "' has no client");
  }

  std::string label() const override { return "model:" + tag_; }
  bool wants_views() const override { return opts_.vision; }

  Action act(const Observation& obs, const AgentMemory& mem, std::span<const Action> legal) override {
    std::string options;
    for (const auto& a : legal) options += "\n- " + format_legal(a);
    const auto prompt = context(obs, mem) + "\nAvailable actions:" + options +
                        "\n\nRespond with exactly one action, optionally followed by ' | say(message)'.";
    Action out;
    const bool ok = ask(obs, prompt, [&](const std::string& reply) {
      out = parse_action_reply(reply, *ctx_.map, ctx_.players, legal);
    });
    if (!ok) {
      out = Action::wait();
      out.note = note_;
    }
    return out;
  }

  Utterance speak(const Observation& obs, const AgentMemory& mem) override {
    const auto prompt = context(obs, mem) + "\nIt is your turn to speak in the meeting. Respond with what you say.";
    std::string text;
    const bool ok = ask(obs, prompt, [&](const std::string& reply) {
      text = parse_utterance_reply(reply);
      if (text.empty()) throw ResponseError(ResponseError::Kind::Empty, "empty utterance");
    });
    if (!ok) return {"", note_};
    return {text, {}};
  }

  VoteChoice vote(const Observation& obs, const AgentMemory& mem) override {
    std::vector<std::string> alive;
    const auto& dead = obs.summary.meeting->known_dead;
    for (const auto& p : ctx_.players) {
      if (std::find(dead.begin(), dead.end(), p) == dead.end()) alive.push_back(p);
    }
    const auto prompt = context(obs, mem) + "\nVoting is open. Living players: " + join(alive) +
                        ".\nRespond with exactly one player name, or 'skip'.";
    std::optional<std::string> target;
    const bool ok = ask(obs, prompt, [&](const std::string& reply) { target = parse_vote_reply(reply, alive); });
    if (!ok) return {std::nullopt, note_};
    return {target, {}};
  }

 private:
  std::string format_legal(const Action& a) const {
    switch (a.kind) {
      case ActionKind::Wait: return "wait";
      case ActionKind::Move: return "move(" + ctx_.map->name(*a.room) + ")";
      case ActionKind::DoTask: return "do_task()";
      case ActionKind::Report: return "report()";
      case ActionKind::CallMeeting: return "call_meeting()";
      case ActionKind::Kill: return "kill(" + ctx_.players.at(idx(*a.target)) + ")";
    }
    return "wait";
  }

  std::string context(const Observation& obs, const AgentMemory& mem) {
    if (system_.empty()) system_ = system_prompt(ctx_, obs.summary.teammates);
    return "CURRENT OBSERVATION\n" + obs.summary.to_text() + "\nYOUR MEMORY\n" + mem.digest(opts_.memory_window);
  }

  // Sends the prompt, re-prompting with the parse error up to the retry
  // budget. Returns false when every attempt failed; note_ then says why.
  template <typename Parse>
  bool ask(const Observation& obs, const std::string& prompt, Parse&& parse) {
    std::vector<ChatMessage> msgs{{"system", system_, {}}, {"user", prompt, {}}};
    if (opts_.vision) msgs.back().svg_images = {obs.global_view.svg, obs.local_view.svg};
    for (int attempt = 0; attempt <= opts_.retries; ++attempt) {
      std::string reply;
      try {
        reply = client_->complete(msgs);
      } catch (const TransportError& e) {
        note_ = "policy_fallback:transport";
        continue;
      }
      try {
        parse(reply);
        return true;
      } catch (const ResponseError& e) {
        note_ = "policy_fallback:unparseable";
        msgs.push_back({"assistant", reply, {}});
        msgs.push_back({"user", std::string("That reply could not be used (") + e.what() +
                                    "). Answer again in exactly the required format.", {}});
      }
    }
    return false;
  }

  SeatContext ctx_;
  std::shared_ptr<ChatClient> client_;
  std::string tag_;
  ModelPolicyOptions opts_;
  std::string system_;
  std::string note_;
};

}  // namespace

std::string system_prompt(const SeatContext& ctx, const std::vector<std::string>& teammates) {
  const bool duck = ctx.role == Role::Duck;
  const int ducks = ctx.config.n_ducks;
  const int geese = ctx.config.n_agents - ducks;
  std::string mates;
  if (duck) mates = teammates.empty() ? "You have no Duck teammates." : "Your Duck teammates: " + join(teammates) + ".";
  const auto strategy = std::string(bundled_asset(duck ? "prompts/duck.v1.txt" : "prompts/goose.v1.txt"));
  return fill_template(bundled_asset("prompts/system.v1.txt"),
                       {{"player_name", ctx.name},
                        {"role", duck ? "Duck" : "Goose"},
                        {"objective", duck ? "Eliminate Geese until Ducks are at least as many as Geese, without "
                                             "being voted out."
                                           : "Complete your tasks and vote out every Duck."},
                        {"total_geese", std::to_string(geese)},
                        {"total_ducks", std::to_string(ducks)},
                        {"all_players", join(ctx.players)},
                        {"teammates_line", mates},
                        {"strategy", strategy}});
}

std::unique_ptr<Policy> make_model_policy(const SeatContext& ctx, std::shared_ptr<ChatClient> client, std::string tag,
                                          ModelPolicyOptions opts) {
  return std::make_unique<ModelPolicy>(ctx, std::move(client), std::move(tag), opts);
}

}  // namespace quack
