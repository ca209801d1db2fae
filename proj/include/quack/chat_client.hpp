#pragma once

#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace quack {

// One model endpoint, as named in a run spec. The credential itself is never
// stored here; only the environment variable that holds it.
struct EndpointConfig {
  std::string tag;
  std::string url;    // full chat-completions URL, e.g. https://host/v1/chat/completions
  std::string model;
  std::string api_key_env = "QUACK_API_KEY";
  int timeout_seconds = 60;
  int max_tokens = 512;
  double temperature = 0.0;
  bool vision = false;  // attach rendered views as images

  static EndpointConfig from_json(const nlohmann::json& doc);
};

struct ChatMessage {
  std::string role;  // system | user | assistant
  std::string text;
  std::vector<std::string> svg_images;
};

class ChatClient {
 public:
  virtual ~ChatClient() = default;
  // Returns the assistant text. Throws TransportError.
  virtual std::string complete(const std::vector<ChatMessage>& messages) = 0;
  virtual int calls() const = 0;
};

// OpenAI-style chat-completions over HTTP(S).
std::unique_ptr<ChatClient> make_http_client(const EndpointConfig& cfg);

// Builds the request body; exposed for tests.
nlohmann::json chat_request_body(const EndpointConfig& cfg, const std::vector<ChatMessage>& messages);
// Pulls choices[0].message.content out of a response body. Throws TransportError.
std::string chat_response_text(const std::string& body);

}  // namespace quack
