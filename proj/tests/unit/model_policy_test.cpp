#include <gtest/gtest.h>

#include <deque>
#include <functional>

#include "quack/cli.hpp"
#include "quack/error.hpp"
#include "quack/model_policy.hpp"
#include "quack/replay.hpp"
#include "testkit.hpp"

namespace quack {
namespace {

// Replies from a queue; an empty string in the queue raises a transport error.
class QueueClient : public ChatClient {
 public:
  explicit QueueClient(std::deque<std::string> replies) : replies_(std::move(replies)) {}
  std::string complete(const std::vector<ChatMessage>& messages) override {
    ++calls_;
    seen_ = messages;
    if (replies_.empty()) throw TransportError("queue exhausted");
    auto r = replies_.front();
    replies_.pop_front();
    if (r.empty()) throw TransportError("connection reset");
    return r;
  }
  int calls() const override { return calls_; }
  std::vector<ChatMessage> seen_;

 private:
  std::deque<std::string> replies_;
  int calls_ = 0;
};

// Answers by prompt kind.
class RuleClient : public ChatClient {
 public:
  std::string complete(const std::vector<ChatMessage>& messages) override {
    ++calls_;
    const auto& p = messages.back().text;
    if (p.find("Voting is open") != std::string::npos) return "skip";
    if (p.find("turn to speak") != std::string::npos) return "I was doing tasks.";
    return "wait";
  }
  int calls() const override { return calls_; }

 private:
  int calls_ = 0;
};

struct Seat {
  Game game{default_map(), testkit::default_config(3)};
  SeatContext ctx;
  Observation obs;
  AgentMemory mem;
  std::vector<Action> legal;

  Seat() {
    const auto& s = game.state();
    for (const auto& a : s.agents) ctx.players.push_back(a.name);
    ctx.map = &default_map();
    ctx.config = game.config();
    ctx.name = s.agents[0].name;
    ctx.role = s.agents[0].role;
    obs.summary = build_summary(s, default_map(), game.config(), player_at(0));
    legal = game.legal_actions(player_at(0));
  }
};

TEST(ModelPolicy, RetriesUntilAReplyParses) {
  Seat seat;
  auto client = std::make_shared<QueueClient>(std::deque<std::string>{"dance", "wait"});
  auto policy = make_model_policy(seat.ctx, client, "fake");
  const auto a = policy->act(seat.obs, seat.mem, seat.legal);
  EXPECT_EQ(a.kind, ActionKind::Wait);
  EXPECT_TRUE(a.note.empty());
  EXPECT_EQ(client->calls(), 2);
  // The retry carries the bad reply and the reason.
  ASSERT_EQ(client->seen_.size(), 4u);
  EXPECT_EQ(client->seen_[2].text, "dance");
  EXPECT_EQ(policy->label(), "model:fake");
}

TEST(ModelPolicy, FallsBackAfterTheRetryBudget) {
  Seat seat;
  auto client = std::make_shared<QueueClient>(std::deque<std::string>{"dance", "sing", "fly", "wait"});
  auto policy = make_model_policy(seat.ctx, client, "fake", {.retries = 2});
  const auto a = policy->act(seat.obs, seat.mem, seat.legal);
  EXPECT_EQ(a.kind, ActionKind::Wait);
  EXPECT_EQ(a.note, "policy_fallback:unparseable");
  EXPECT_EQ(client->calls(), 3);
}

TEST(ModelPolicy, TransportErrorsFallBackToo) {
  Seat seat;
  auto client = std::make_shared<QueueClient>(std::deque<std::string>{});
  auto policy = make_model_policy(seat.ctx, client, "fake", {.retries = 1});
  const auto a = policy->act(seat.obs, seat.mem, seat.legal);
  EXPECT_EQ(a.note, "policy_fallback:transport");
  EXPECT_EQ(client->calls(), 2);
}

TEST(ModelPolicy, SystemPromptCarriesTheRole) {
  Seat seat;
  seat.ctx.role = Role::Duck;
  const auto duck = system_prompt(seat.ctx, {"Zed"});
  seat.ctx.role = Role::Goose;
  const auto goose = system_prompt(seat.ctx, {});
  EXPECT_NE(duck, goose);
  EXPECT_NE(duck.find("Zed"), std::string::npos);
  EXPECT_EQ(goose.find("{{"), std::string::npos);
}

TEST(ModelPolicy, FullGameWithModelSeatsReplays) {
  std::vector<SeatBinding> seats(6, SeatBinding{"model:fake", "model:fake"});
  auto client = std::make_shared<RuleClient>();
  const auto log = play_game(default_map(), testkit::default_config(4), seats, {}, "fake-run",
                             [&](const std::string&) { return client; });
  ASSERT_TRUE(log.complete());
  EXPECT_NO_THROW(replay(log));
  EXPECT_GT(client->calls(), 0);
  EXPECT_EQ(log.header().meta.at("setting"), "fake-run");
  EXPECT_EQ(log.header().meta.at("seats").begin()->get<std::string>(), "model:fake");
}

TEST(Endpoint, CredentialsOnlyFromEnvironment) {
  EXPECT_THROW(EndpointConfig::from_json({{"url", "http://x/v1/chat/completions"}, {"model", "m"}, {"api_key", "k"}}),
               ConfigError);
  EXPECT_THROW(EndpointConfig::from_json({{"model", "m"}}), ConfigError);
  auto ep = EndpointConfig::from_json(
      {{"url", "http://127.0.0.1:9/v1/chat/completions"}, {"model", "m"}, {"api_key_env", "QUACK_TEST_UNSET_KEY"}});
  ep.tag = "t";
  ::unsetenv("QUACK_TEST_UNSET_KEY");
  EXPECT_THROW(make_http_client(ep), ConfigError);
}

TEST(Endpoint, RequestAndResponseBodies) {
  EndpointConfig ep;
  ep.model = "m1";
  ep.max_tokens = 64;
  const auto body = chat_request_body(ep, {{"system", "be brief", {}}, {"user", "hi", {"<svg/>"}}});
  EXPECT_EQ(body.at("model"), "m1");
  EXPECT_EQ(body.at("max_tokens"), 64);
  ASSERT_EQ(body.at("messages").size(), 2u);
  EXPECT_EQ(chat_response_text(R"({"choices": [{"message": {"content": "wait"}}]})"), "wait");
  EXPECT_THROW(chat_response_text("{}"), TransportError);
  EXPECT_THROW(chat_response_text("<html>"), TransportError);
}

}  // namespace
}  // namespace quack
