#include "moraldial/chatbot.hpp"

#include <fstream>
#include <optional>

#include "moraldial/error.hpp"
#include "moraldial/text.hpp"

namespace moraldial {

using nlohmann::json;

void to_json(json& j, const ChatMessage& m) {
  j = json{{"role", m.role == Role::user ? "user" : "bot"}, {"text", m.text}};
}

void from_json(const json& j, ChatMessage& m) {
  const auto role = j.at("role").get<std::string>();
  if (role == "user") {
    m.role = Role::user;
  } else if (role == "bot") {
    m.role = Role::bot;
  } else {
    throw InputError("unknown chat role '" + role + "'");
  }
  m.text = j.at("text").get<std::string>();
}

HttpChatbotClient::HttpChatbotClient(std::string endpoint, std::chrono::milliseconds timeout, RetryPolicy retry,
                                     json options)
    : http_("chatbot", std::move(endpoint), timeout, retry), options_(std::move(options)) {}

std::string HttpChatbotClient::reply(const std::vector<ChatMessage>& context) {
  json body = {{"context", context}};
  if (!options_.is_null()) body["options"] = options_;
  const json response = http_.post("/chat", body);
  if (!response.is_object() || !response.contains("reply") || !response["reply"].is_string()) {
    throw ProtocolError("chatbot response lacks a string 'reply'");
  }
  return response["reply"].get<std::string>();
}

namespace {

struct Rule {
  std::optional<std::string> first;
  std::optional<std::size_t> turn;
  std::optional<std::string> last_contains;
  std::string reply;
};

}  // namespace

ScriptedChatbot ScriptedChatbot::load(const std::filesystem::path& rules_file) {
  std::ifstream in(rules_file);
  if (!in) throw InputError("cannot open chatbot script " + rules_file.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(rules_file.string() + ": " + e.what());
  }
  std::vector<Rule> rules;
  for (const auto& r : doc.value("rules", json::array())) {
    Rule rule;
    if (r.contains("first")) rule.first = r["first"].get<std::string>();
    if (r.contains("turn")) rule.turn = r["turn"].get<std::size_t>();
    if (r.contains("last_contains")) rule.last_contains = r["last_contains"].get<std::string>();
    rule.reply = r.at("reply").get<std::string>();
    rules.push_back(std::move(rule));
  }
  std::string fallback = doc.value("default", std::string("I am not sure."));

  return ScriptedChatbot([rules = std::move(rules), fallback = std::move(fallback)](const std::vector<ChatMessage>& ctx) {
    const ChatMessage* first = nullptr;
    const ChatMessage* last = nullptr;
    std::size_t user_turns = 0;
    for (const auto& m : ctx) {
      if (m.role != Role::user) continue;
      if (!first) first = &m;
      last = &m;
      ++user_turns;
    }
    for (const auto& rule : rules) {
      if (rule.first && (!first || first->text != *rule.first)) continue;
      if (rule.turn && *rule.turn != user_turns) continue;
      if (rule.last_contains && (!last || !text::icontains(last->text, *rule.last_contains))) continue;
      return rule.reply;
    }
    return fallback;
  });
}

}  // namespace moraldial
