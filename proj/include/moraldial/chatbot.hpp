#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "moraldial/http_json.hpp"

namespace moraldial {

enum class Role { user, bot };

struct ChatMessage {
  Role role = Role::user;
  std::string text;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

void to_json(nlohmann::json& j, const ChatMessage& m);
void from_json(const nlohmann::json& j, ChatMessage& m);

/// Stateless chatbot: the whole context is sent on every turn and the reply
/// depends on nothing else. Implementations must be safe to call concurrently.
class ChatbotClient {
 public:
  virtual ~ChatbotClient() = default;
  /// `context` ends with a user message.
  virtual std::string reply(const std::vector<ChatMessage>& context) = 0;
};

/// POST /chat {"context": [{"role", "text"}, ...]} -> {"reply": "..."}.
/// Extra generation options, when set, are forwarded as "options".
class HttpChatbotClient final : public ChatbotClient {
 public:
  HttpChatbotClient(std::string endpoint, std::chrono::milliseconds timeout = std::chrono::seconds(60),
                    RetryPolicy retry = {}, nlohmann::json options = nullptr);
  std::string reply(const std::vector<ChatMessage>& context) override;

 private:
  HttpJsonClient http_;
  nlohmann::json options_;
};

/// Offline chatbot driven by a function or by a rules file.
///
/// Rules file (JSON): {"rules": [{"first": ..., "turn": N, "last_contains": ..., "reply": ...}], "default": ...}.
/// A rule matches when every condition it sets holds: `first` equals the first
/// user message, `turn` equals the number of user messages so far and
/// `last_contains` occurs in the last user message (case-insensitive). The
/// first matching rule wins.
class ScriptedChatbot final : public ChatbotClient {
 public:
  using Script = std::function<std::string(const std::vector<ChatMessage>&)>;

  explicit ScriptedChatbot(Script script) : script_(std::move(script)) {}
  static ScriptedChatbot load(const std::filesystem::path& rules_file);

  std::string reply(const std::vector<ChatMessage>& context) override { return script_(context); }

 private:
  Script script_;
};

}  // namespace moraldial
