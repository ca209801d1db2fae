#pragma once

#include <memory>
#include <string>

#include "quack/agents.hpp"
#include "quack/chat_client.hpp"

namespace quack {

struct ModelPolicyOptions {
  int retries = 2;         // re-prompts after an unusable reply
  int memory_window = 0;   // ticks of memory in the digest; 0 = all
  bool vision = false;     // attach rendered views
};

// The system prompt for a seat: shared template plus the role's strategy block.
std::string system_prompt(const SeatContext& ctx, const std::vector<std::string>& teammates);

// A seat driven by a chat endpoint. After the retry budget is spent it falls
// back to wait / an empty utterance / skip, with a "policy_fallback" note.
std::unique_ptr<Policy> make_model_policy(const SeatContext& ctx, std::shared_ptr<ChatClient> client,
                                          std::string tag, ModelPolicyOptions opts = {});

}  // namespace quack
