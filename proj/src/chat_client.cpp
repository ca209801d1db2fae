#include "quack/chat_client.hpp"

#include <cstdlib>

#include <httplib.h>

#include "quack/error.hpp"

namespace quack {

using nlohmann::json;

EndpointConfig EndpointConfig::from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("endpoint: expected an object");
  EndpointConfig c;
  for (const auto& [k, v] : doc.items()) {
    if (k == "url") {
      c.url = v.get<std::string>();
    } else if (k == "model") {
      c.model = v.get<std::string>();
    } else if (k == "api_key_env") {
      c.api_key_env = v.get<std::string>();
    } else if (k == "timeout_seconds") {
      c.timeout_seconds = v.get<int>();
    } else if (k == "max_tokens") {
      c.max_tokens = v.get<int>();
    } else if (k == "temperature") {
      c.temperature = v.get<double>();
    } else if (k == "vision") {
      c.vision = v.get<bool>();
    } else if (k == "api_key") {
      throw ConfigError("endpoint: credentials must come from the environment (use api_key_env)");
    } else {
      throw ConfigError("endpoint: unknown field '" + k + "'");
    }
  }
  if (c.url.empty() || c.model.empty()) throw ConfigError("endpoint: url and model are required");
  return c;
}

json chat_request_body(const EndpointConfig& cfg, const std::vector<ChatMessage>& messages) {
  json msgs = json::array();
  for (const auto& m : messages) {
    if (m.svg_images.empty() || !cfg.vision) {
      msgs.push_back({{"role", m.role}, {"content", m.text}});
      continue;
    }
    json parts = json::array();
    parts.push_back({{"type", "text"}, {"text", m.text}});
    for (const auto& svg : m.svg_images) {
      parts.push_back({{"type", "image_url"},
                       {"image_url", {{"url", "data:image/svg+xml;base64," + httplib::detail::base64_encode(svg)}}}});
    }
    msgs.push_back({{"role", m.role}, {"content", parts}});
  }
  return {{"model", cfg.model}, {"messages", msgs}, {"temperature", cfg.temperature}, {"max_tokens", cfg.max_tokens}};
}

std::string chat_response_text(const std::string& body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error&) {
    throw TransportError("endpoint returned a non-JSON body");
  }
  try {
    const auto& content = doc.at("choices").at(0).at("message").at("content");
    if (content.is_string()) return content.get<std::string>();
    if (content.is_array()) {
      std::string out;
      for (const auto& part : content) {
        if (part.value("type", "") == "text") out += part.value("text", "");
      }
      return out;
    }
  } catch (const json::exception&) {
  }
  throw TransportError("endpoint response has no choices[0].message.content");
}

namespace {

class HttpChatClient : public ChatClient {
 public:
  explicit HttpChatClient(EndpointConfig cfg) : cfg_(std::move(cfg)) {
    const auto scheme_end = cfg_.url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("endpoint: url needs a scheme: " + cfg_.url);
    const auto path_start = cfg_.url.find('/', scheme_end + 3);
    base_ = cfg_.url.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : cfg_.url.substr(path_start);
    if (const char* key = std::getenv(cfg_.api_key_env.c_str())) key_ = key;
    if (key_.empty()) throw ConfigError("endpoint " + cfg_.tag + ": environment variable " + cfg_.api_key_env + " is not set");
    client_ = std::make_unique<httplib::Client>(base_);
    client_->set_connection_timeout(cfg_.timeout_seconds, 0);
    client_->set_read_timeout(cfg_.timeout_seconds, 0);
    client_->set_keep_alive(true);
  }

  std::string complete(const std::vector<ChatMessage>& messages) override {
    ++calls_;
    const auto body = chat_request_body(cfg_, messages).dump();
    httplib::Headers headers{{"Authorization", "Bearer " + key_}};
    auto res = client_->Post(path_, headers, body, "application/json");
    if (!res) throw TransportError("request to " + base_ + " failed: " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300)
      throw TransportError("endpoint returned HTTP " + std::to_string(res->status));
    return chat_response_text(res->body);
  }

  int calls() const override { return calls_; }

 private:
  EndpointConfig cfg_;
  std::string base_;
  std::string path_;
  std::string key_;
  std::unique_ptr<httplib::Client> client_;
  int calls_ = 0;
};

}  // namespace

std::unique_ptr<ChatClient> make_http_client(const EndpointConfig& cfg) { return std::make_unique<HttpChatClient>(cfg); }

}  // namespace quack
