#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "moraldial/chatbot.hpp"
#include "moraldial/error.hpp"

namespace httplib {
class Server;
}

namespace moraldial {

class SessionNotFound : public InputError {
 public:
  using InputError::InputError;
};

/// The request is well-formed but not allowed in the session's current state.
class SessionConflict : public InputError {
 public:
  using InputError::InputError;
};

inline constexpr std::size_t kMinSessionTurns = 8;

/// Per-bot-sentence human judgment. Morality (1-5) is given exactly when the
/// sentence embodies some moral.
struct Annotation {
  bool embodiment = false;
  std::optional<int> morality;
  bool sensibleness = false;
  bool specificity = false;

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

/// Empty when valid, otherwise the reason.
std::optional<std::string> validate_annotation(const Annotation& a);

void to_json(nlohmann::json& j, const Annotation& a);
/// Throws InputError on wrong types or a missing field.
void from_json(const nlohmann::json& j, Annotation& a);

enum class Side { a, b };

std::string_view to_string(Side s);
std::optional<Side> parse_side(std::string_view s);

struct SideState {
  std::string model;
  std::vector<ChatMessage> transcript;
  std::map<std::size_t, Annotation> annotations;  // by turn index
};

struct PairedSession {
  std::string id;
  std::string opening;
  SideState a;
  SideState b;
  bool completed = false;

  SideState& side(Side s) { return s == Side::a ? a : b; }
  const SideState& side(Side s) const { return s == Side::a ? a : b; }
};

void to_json(nlohmann::json& j, const PairedSession& s);

struct ModelMeans {
  std::string model;
  std::size_t sessions = 0;
  std::size_t sentences = 0;
  double embodiment = 0;
  std::optional<double> morality;  // over embodied sentences
  double sensibleness = 0;
  double specificity = 0;
};

/// Paired human-evaluation sessions: one opening talked through with two
/// chatbots. Thread-safe.
class SessionManager {
 public:
  struct Model {
    std::string name;
    ChatbotClient* client = nullptr;
  };

  /// Snapshots are written to `store_dir` (one JSON file per session) after
  /// every change when it is set.
  SessionManager(Model a, Model b, std::optional<std::filesystem::path> store_dir = std::nullopt);

  /// Sends the opening to both models; both transcripts start with it.
  PairedSession create(const std::string& opening);
  /// Appends a user turn and the model's reply to one side; returns the reply.
  std::string message(const std::string& id, Side side, const std::string& text);
  void annotate(const std::string& id, Side side, std::size_t turn_index, const Annotation& annotation);
  /// Requires kMinSessionTurns turns per side and an annotation on every bot
  /// turn. Annotations are locked afterwards.
  void complete(const std::string& id);
  PairedSession get(const std::string& id) const;

  /// Means over completed sessions, one row per model.
  std::vector<ModelMeans> model_means() const;
  /// One row per annotation of completed sessions.
  std::string export_csv() const;
  nlohmann::json export_json() const;

 private:
  struct Entry {
    std::mutex mu;
    PairedSession session;
  };

  std::shared_ptr<Entry> find(const std::string& id) const;
  ChatbotClient& client(Side side) const;
  void persist(const PairedSession& s) const;

  Model a_;
  Model b_;
  std::optional<std::filesystem::path> store_dir_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::size_t counter_ = 0;
};

/// Routes: POST /sessions, POST /sessions/{id}/message,
/// POST /sessions/{id}/annotations, POST /sessions/{id}/complete,
/// GET /sessions/{id}, GET /export?format=json|csv.
void bind_session_routes(httplib::Server& server, SessionManager& manager);

}  // namespace moraldial
