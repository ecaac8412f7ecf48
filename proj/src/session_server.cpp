#include "moraldial/session_server.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <httplib.h>

namespace moraldial {

using nlohmann::json;

std::optional<std::string> validate_annotation(const Annotation& a) {
  if (a.embodiment && !a.morality) return "morality is required when the sentence embodies a moral";
  if (!a.embodiment && a.morality) return "morality must be empty when the sentence embodies no moral";
  if (a.morality && (*a.morality < 1 || *a.morality > 5)) return "morality must be between 1 and 5";
  return std::nullopt;
}

void to_json(json& j, const Annotation& a) {
  j = json{{"embodiment", a.embodiment}, {"sensibleness", a.sensibleness}, {"specificity", a.specificity}};
  if (a.morality) j["morality"] = *a.morality;
}

void from_json(const json& j, Annotation& a) {
  auto boolean = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_boolean()) throw InputError(fmt::format("'{}' must be a boolean", key));
    return j[key].get<bool>();
  };
  a.embodiment = boolean("embodiment");
  a.sensibleness = boolean("sensibleness");
  a.specificity = boolean("specificity");
  a.morality.reset();
  if (j.contains("morality") && !j["morality"].is_null()) {
    if (!j["morality"].is_number_integer()) throw InputError("'morality' must be an integer");
    a.morality = j["morality"].get<int>();
  }
}

std::string_view to_string(Side s) { return s == Side::a ? "a" : "b"; }

std::optional<Side> parse_side(std::string_view s) {
  if (s == "a" || s == "A") return Side::a;
  if (s == "b" || s == "B") return Side::b;
  return std::nullopt;
}

namespace {

json side_json(const SideState& s) {
  json annotations = json::object();
  for (const auto& [turn, a] : s.annotations) annotations[std::to_string(turn)] = a;
  return json{{"model", s.model}, {"transcript", s.transcript}, {"annotations", annotations}};
}

}  // namespace

void to_json(json& j, const PairedSession& s) {
  j = json{{"id", s.id}, {"opening", s.opening}, {"completed", s.completed}, {"a", side_json(s.a)}, {"b", side_json(s.b)}};
}

SessionManager::SessionManager(Model a, Model b, std::optional<std::filesystem::path> store_dir)
    : a_(std::move(a)), b_(std::move(b)), store_dir_(std::move(store_dir)) {
  if (!a_.client || !b_.client) throw ConfigError("paired sessions need two chatbot endpoints");
  if (store_dir_) std::filesystem::create_directories(*store_dir_);
}

ChatbotClient& SessionManager::client(Side side) const { return side == Side::a ? *a_.client : *b_.client; }

std::shared_ptr<SessionManager::Entry> SessionManager::find(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw SessionNotFound("no session " + id);
  return it->second;
}

void SessionManager::persist(const PairedSession& s) const {
  if (!store_dir_) return;
  const auto path = *store_dir_ / (s.id + ".json");
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << json(s).dump(2) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

PairedSession SessionManager::create(const std::string& opening) {
  if (opening.empty()) throw InputError("opening is empty");
  auto entry = std::make_shared<Entry>();
  {
    std::lock_guard lock(mu_);
    entry->session.id = fmt::format("s{:05d}", ++counter_);
  }
  auto& s = entry->session;
  s.opening = opening;
  s.a.model = a_.name;
  s.b.model = b_.name;
  for (Side side : {Side::a, Side::b}) {
    auto& st = s.side(side);
    st.transcript.push_back({Role::user, opening});
    st.transcript.push_back({Role::bot, client(side).reply(st.transcript)});
  }
  {
    std::lock_guard lock(mu_);
    sessions_[s.id] = entry;
  }
  std::lock_guard lock(entry->mu);
  persist(s);
  return s;
}

std::string SessionManager::message(const std::string& id, Side side, const std::string& text) {
  if (text.empty()) throw InputError("message is empty");
  auto entry = find(id);
  std::lock_guard lock(entry->mu);
  auto& s = entry->session;
  if (s.completed) throw SessionConflict("session " + id + " is completed");
  auto& st = s.side(side);
  auto context = st.transcript;
  context.push_back({Role::user, text});
  std::string reply = client(side).reply(context);
  st.transcript = std::move(context);
  st.transcript.push_back({Role::bot, reply});
  persist(s);
  return reply;
}

void SessionManager::annotate(const std::string& id, Side side, std::size_t turn_index, const Annotation& annotation) {
  if (auto why = validate_annotation(annotation)) throw InputError(*why);
  auto entry = find(id);
  std::lock_guard lock(entry->mu);
  auto& s = entry->session;
  if (s.completed) throw SessionConflict("session " + id + " is completed; annotations are locked");
  auto& st = s.side(side);
  if (turn_index >= st.transcript.size()) {
    throw InputError(fmt::format("session {} side {} has no turn {}", id, to_string(side), turn_index));
  }
  if (st.transcript[turn_index].role != Role::bot) {
    throw InputError(fmt::format("turn {} is not a bot turn", turn_index));
  }
  st.annotations[turn_index] = annotation;
  persist(s);
}

void SessionManager::complete(const std::string& id) {
  auto entry = find(id);
  std::lock_guard lock(entry->mu);
  auto& s = entry->session;
  if (s.completed) return;
  for (Side side : {Side::a, Side::b}) {
    const auto& st = s.side(side);
    if (st.transcript.size() < kMinSessionTurns) {
      throw SessionConflict(fmt::format("side {} has {} turns; at least {} are required", to_string(side),
                                        st.transcript.size(), kMinSessionTurns));
    }
    for (std::size_t i = 0; i < st.transcript.size(); ++i) {
      if (st.transcript[i].role == Role::bot && !st.annotations.count(i)) {
        throw SessionConflict(fmt::format("side {} turn {} is not annotated", to_string(side), i));
      }
    }
  }
  s.completed = true;
  persist(s);
}

PairedSession SessionManager::get(const std::string& id) const {
  auto entry = find(id);
  std::lock_guard lock(entry->mu);
  return entry->session;
}

std::vector<ModelMeans> SessionManager::model_means() const {
  std::map<std::string, ModelMeans> by_model;
  std::map<std::string, std::size_t> morality_n;
  std::map<std::string, double> morality_sum;
  std::vector<std::shared_ptr<Entry>> entries;
  {
    std::lock_guard lock(mu_);
    for (const auto& [id, e] : sessions_) entries.push_back(e);
  }
  for (const auto& e : entries) {
    std::lock_guard lock(e->mu);
    const auto& s = e->session;
    if (!s.completed) continue;
    for (Side side : {Side::a, Side::b}) {
      const auto& st = s.side(side);
      auto& m = by_model[st.model];
      m.model = st.model;
      ++m.sessions;
      for (const auto& [turn, a] : st.annotations) {
        ++m.sentences;
        m.embodiment += a.embodiment;
        m.sensibleness += a.sensibleness;
        m.specificity += a.specificity;
        if (a.morality) {
          ++morality_n[st.model];
          morality_sum[st.model] += *a.morality;
        }
      }
    }
  }
  std::vector<ModelMeans> out;
  for (auto& [name, m] : by_model) {
    if (m.sentences > 0) {
      const double n = static_cast<double>(m.sentences);
      m.embodiment /= n;
      m.sensibleness /= n;
      m.specificity /= n;
    }
    if (morality_n[name] > 0) m.morality = morality_sum[name] / static_cast<double>(morality_n[name]);
    out.push_back(m);
  }
  return out;
}

std::string SessionManager::export_csv() const {
  std::ostringstream out;
  out << "session_id,model,side,turn_index,embodiment,morality,sensibleness,specificity\n";
  std::vector<std::shared_ptr<Entry>> entries;
  {
    std::lock_guard lock(mu_);
    for (const auto& [id, e] : sessions_) entries.push_back(e);
  }
  for (const auto& e : entries) {
    std::lock_guard lock(e->mu);
    const auto& s = e->session;
    if (!s.completed) continue;
    for (Side side : {Side::a, Side::b}) {
      const auto& st = s.side(side);
      for (const auto& [turn, a] : st.annotations) {
        out << s.id << ',' << st.model << ',' << to_string(side) << ',' << turn << ',' << (a.embodiment ? "true" : "false")
            << ',' << (a.morality ? std::to_string(*a.morality) : "") << ',' << (a.sensibleness ? "true" : "false") << ','
            << (a.specificity ? "true" : "false") << '\n';
      }
    }
  }
  return out.str();
}

json SessionManager::export_json() const {
  json models = json::array();
  for (const auto& m : model_means()) {
    json row = {{"model", m.model},
                {"sessions", m.sessions},
                {"sentences", m.sentences},
                {"embodiment", m.embodiment},
                {"sensibleness", m.sensibleness},
                {"specificity", m.specificity}};
    row["morality"] = m.morality ? json(*m.morality) : json(nullptr);
    models.push_back(std::move(row));
  }
  return json{{"models", models}};
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
  try {
    json j = json::parse(req.body);
    if (!j.is_object()) throw InputError("request body must be a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed JSON body: ") + e.what());
  }
}

Side side_of(const json& body) {
  auto side = parse_side(body.value("side", ""));
  if (!side) throw InputError("'side' must be \"a\" or \"b\"");
  return *side;
}

template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const SessionNotFound& e) {
      send_json(res, 404, {{"error", e.what()}});
    } catch (const SessionConflict& e) {
      send_json(res, 409, {{"error", e.what()}});
    } catch (const InputError& e) {
      send_json(res, 400, {{"error", e.what()}});
    } catch (const json::exception& e) {
      send_json(res, 400, {{"error", e.what()}});
    } catch (const ServiceUnavailable& e) {
      send_json(res, 503, {{"error", e.what()}});
    } catch (const std::exception& e) {
      send_json(res, 500, {{"error", e.what()}});
    }
  };
}

}  // namespace

void bind_session_routes(httplib::Server& server, SessionManager& manager) {
  server.Post("/sessions", guarded([&manager](const httplib::Request& req, httplib::Response& res) {
                const json body = parse_body(req);
                if (!body.contains("opening") || !body["opening"].is_string()) throw InputError("'opening' is required");
                send_json(res, 201, manager.create(body["opening"].get<std::string>()));
              }));
  server.Post(R"(/sessions/([^/]+)/message)", guarded([&manager](const httplib::Request& req, httplib::Response& res) {
                const json body = parse_body(req);
                if (!body.contains("text") || !body["text"].is_string()) throw InputError("'text' is required");
                const std::string id = req.matches[1];
                const Side side = side_of(body);
                const std::string reply = manager.message(id, side, body["text"].get<std::string>());
                const auto s = manager.get(id);
                send_json(res, 200, {{"reply", reply}, {"turn_index", s.side(side).transcript.size() - 1}});
              }));
  server.Post(R"(/sessions/([^/]+)/annotations)", guarded([&manager](const httplib::Request& req, httplib::Response& res) {
                const json body = parse_body(req);
                if (!body.contains("turn_index") || !body["turn_index"].is_number_unsigned()) {
                  throw InputError("'turn_index' must be a non-negative integer");
                }
                const Annotation a = body.get<Annotation>();
                manager.annotate(req.matches[1], side_of(body), body["turn_index"].get<std::size_t>(), a);
                send_json(res, 200, {{"ok", true}});
              }));
  server.Post(R"(/sessions/([^/]+)/complete)", guarded([&manager](const httplib::Request& req, httplib::Response& res) {
                manager.complete(req.matches[1]);
                send_json(res, 200, {{"completed", true}});
              }));
  server.Get(R"(/sessions/([^/]+))", guarded([&manager](const httplib::Request& req, httplib::Response& res) {
               send_json(res, 200, manager.get(req.matches[1]));
             }));
  server.Get("/export", guarded([&manager](const httplib::Request& req, httplib::Response& res) {
               const std::string format = req.has_param("format") ? req.get_param_value("format") : "json";
               if (format == "csv") {
                 res.status = 200;
                 res.set_content(manager.export_csv(), "text/csv");
               } else if (format == "json") {
                 send_json(res, 200, manager.export_json());
               } else {
                 throw InputError("format must be json or csv");
               }
             }));
}

}  // namespace moraldial
