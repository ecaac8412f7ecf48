#include "moraldial/orchestrator.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "moraldial/error.hpp"
#include "moraldial/phrases.hpp"
#include "moraldial/rot_composer.hpp"
#include "moraldial/text.hpp"

namespace moraldial {

using nlohmann::json;

namespace {

std::string question_key(const std::string& q) { return text::to_lower(text::trim(q)); }

}  // namespace

std::vector<Opening> select_openings(std::vector<MetaSample> samples, Split split) {
  std::sort(samples.begin(), samples.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  std::vector<const MetaSample*> pool;
  for (const auto& s : samples) {
    if (s.split == split) pool.push_back(&s);
  }

  std::vector<Opening> openings;
  std::set<std::string> seen;
  for (const MetaSample* s : pool) {
    const auto key = question_key(s->question);
    if (!seen.insert(key).second) continue;
    Opening o;
    o.id = s->id;
    o.split = s->split;
    o.question = s->question;
    o.rot_id = s->rot.id;
    o.r_user = compose_statement(s->rot).text;
    o.gold_answer = s->answer;
    o.gold_revised_answer = s->revised_answer;

    const MetaSample* wrap = nullptr;
    const MetaSample* after = nullptr;
    for (const MetaSample* c : pool) {
      if (c->rot.id != s->rot.id || question_key(c->question) == key) continue;
      if (!wrap) wrap = c;
      if (c->id > s->id) {
        after = c;
        break;
      }
    }
    if (const MetaSample* partner = after ? after : wrap) o.partner_question = partner->question;
    openings.push_back(std::move(o));
  }
  return openings;
}

std::string_view to_string(RilContext c) { return c == RilContext::gold ? "gold" : "model"; }

std::optional<RilContext> parse_ril_context(std::string_view s) {
  if (s == "model") return RilContext::model;
  if (s == "gold") return RilContext::gold;
  return std::nullopt;
}

void to_json(json& j, const SessionTranscript& t) {
  j = json{{"id", t.id},         {"split", to_string(t.split)}, {"question", t.question},
           {"rot_id", t.rot_id}, {"r_user", t.r_user},          {"flows", json::object()}};
  if (t.partner_question) j["partner_question"] = *t.partner_question;
  for (const auto& [kind, turns] : t.flows) j["flows"][std::string(to_string(kind))] = turns;
  if (!t.retrieved.empty()) {
    json r = json::array();
    for (const auto& x : t.retrieved) r.push_back({{"rot_id", x.rot_id}, {"text", x.text}, {"similarity", x.similarity}});
    j["retrieved"] = std::move(r);
  }
  if (t.ril_base) j["ril_base"] = to_string(*t.ril_base);
}

void from_json(const json& j, SessionTranscript& t) {
  t = {};
  t.id = j.at("id").get<std::string>();
  auto split = parse_split(j.at("split").get<std::string>());
  if (!split) throw InputError("transcript " + t.id + " has an invalid split");
  t.split = *split;
  t.question = j.at("question").get<std::string>();
  t.rot_id = j.at("rot_id").get<std::string>();
  t.r_user = j.at("r_user").get<std::string>();
  if (j.contains("partner_question")) t.partner_question = j["partner_question"].get<std::string>();
  for (const auto& [name, turns] : j.at("flows").items()) {
    auto kind = parse_flow_kind(name);
    if (!kind) throw InputError("transcript " + t.id + " has unknown flow '" + name + "'");
    t.flows[*kind] = turns.get<std::vector<Turn>>();
  }
  for (const auto& x : j.value("retrieved", json::array())) {
    t.retrieved.push_back({x.at("rot_id").get<std::string>(), x.at("text").get<std::string>(),
                           x.at("similarity").get<double>()});
  }
  if (j.contains("ril_base")) t.ril_base = parse_flow_kind(j["ril_base"].get<std::string>());
}

namespace {

const std::string& turn_text(const SessionTranscript& t, FlowKind kind, std::size_t index) {
  const auto& turns = t.flows.at(kind);
  if (index >= turns.size()) {
    throw InputError(fmt::format("transcript {} flow {} has {} turns", t.id, to_string(kind), turns.size()));
  }
  return turns[index].text;
}

}  // namespace

ScoredSession score_transcript(const SessionTranscript& t, AgreementScorer& scorer, double lambda) {
  ScoredSession out;
  out.record.question_id = t.id;
  out.record.split = t.split;
  auto score = [&](const char* metric, const std::string& q, const std::string& a, const std::string& r) {
    ScoreRequest req{q, a, r};
    AgreementVerdict v = scorer.score(req);
    out.triples.push_back({metric, std::move(req), v});
    return v.as_score;
  };

  if (t.flows.count(FlowKind::MA)) {
    if (t.retrieved.empty()) throw InputError("transcript " + t.id + " has no retrieved safety RoTs");
    const auto& answer = turn_text(t, FlowKind::MA, 1);
    std::vector<double> values;
    for (const auto& r : t.retrieved) values.push_back(score("s_ma", t.question, answer, r.text));
    out.record.s_ma = min_agreement(values);
  }
  if (t.flows.count(FlowKind::ME)) {
    out.record.s_me = score("s_me", t.question, turn_text(t, FlowKind::ME, 1), turn_text(t, FlowKind::ME, 3));
  }
  if (t.flows.count(FlowKind::MR)) {
    const double s1 = score("s_mr1", t.question, turn_text(t, FlowKind::MR, 1), t.r_user);
    const double s2 = score("s_mr2", t.question, turn_text(t, FlowKind::MR, 3), t.r_user);
    const MrScores mr = mr_scores_from(s1, s2, lambda);
    out.record.s_mr1 = mr.s_mr1;
    out.record.s_mr2 = mr.s_mr2;
    out.record.s_delta_mr = mr.s_delta_mr;
    out.record.s_mr = mr.s_mr;
  }
  if (t.flows.count(FlowKind::RIL)) {
    if (!t.partner_question) throw InputError("transcript " + t.id + " has a RIL flow but no partner question");
    out.record.s_ril = score("s_ril", *t.partner_question, turn_text(t, FlowKind::RIL, 5), t.r_user);
  }
  return out;
}

namespace {

std::vector<ChatMessage> to_context(const std::vector<Turn>& turns) {
  std::vector<ChatMessage> ctx;
  ctx.reserve(turns.size());
  for (const auto& t : turns) ctx.push_back({t.speaker == Speaker::user ? Role::user : Role::bot, t.text});
  return ctx;
}

std::string ask(ChatbotClient& bot, std::vector<Turn>& turns, std::string message, TurnTag user_tag, TurnTag bot_tag) {
  turns.push_back({Speaker::user, std::move(message), user_tag});
  std::string reply = bot.reply(to_context(turns));
  turns.push_back({Speaker::bot, reply, bot_tag});
  return reply;
}

}  // namespace

std::vector<Turn> run_me_exchange(ChatbotClient& chatbot, const std::string& question, Rng& rng) {
  const auto& why = pick_phrase(PhraseBank::standard().why_class, rng);
  std::vector<Turn> turns;
  ask(chatbot, turns, question, TurnTag::question, TurnTag::answer);
  ask(chatbot, turns, why, TurnTag::why, TurnTag::rot);
  return turns;
}

SessionTranscript run_session(const Opening& opening, const SessionOptions& options, EvalClients& clients) {
  const auto& phrases = PhraseBank::standard();
  // all phrase draws happen up front so the choice of flows does not shift them
  Rng rng(options.seed, opening.id);
  const std::string why = pick_phrase(phrases.why_class, rng);
  const std::string but = pick_phrase(phrases.but_class, rng);
  const std::string base = pick_phrase(phrases.base_class, rng);

  SessionTranscript t;
  t.id = opening.id;
  t.split = opening.split;
  t.question = opening.question;
  t.rot_id = opening.rot_id;
  t.r_user = opening.r_user;
  t.partner_question = opening.partner_question;

  auto& bot = clients.chatbot;
  std::vector<Turn> shared;
  const std::string answer = ask(bot, shared, opening.question, TurnTag::question, TurnTag::answer);

  if (options.flows.count(FlowKind::MA)) {
    if (!clients.index || !clients.embedder) throw ConfigError("MA flow needs a safety index and an embedder");
    t.flows[FlowKind::MA] = shared;
    t.retrieved = retrieve_topk(*clients.index, answer, *clients.embedder, options.k);
  }

  const bool run_ril = options.flows.count(FlowKind::RIL) && opening.partner_question.has_value();
  const FlowKind ril_base =
      options.flows.count(FlowKind::ME) || !options.flows.count(FlowKind::MR) ? FlowKind::ME : FlowKind::MR;

  std::vector<Turn> me_turns;
  if (options.flows.count(FlowKind::ME) || (run_ril && ril_base == FlowKind::ME)) {
    me_turns = shared;
    ask(bot, me_turns, why, TurnTag::why, TurnTag::rot);
    if (options.flows.count(FlowKind::ME)) t.flows[FlowKind::ME] = me_turns;
  }

  std::vector<Turn> mr_turns;
  if (options.flows.count(FlowKind::MR)) {
    mr_turns = shared;
    ask(bot, mr_turns, join_phrase(but, opening.r_user), TurnTag::rot, TurnTag::revised_answer);
    t.flows[FlowKind::MR] = mr_turns;
  }

  if (run_ril) {
    std::vector<Turn> turns;
    if (options.ril_context == RilContext::model) {
      turns = ril_base == FlowKind::ME ? me_turns : mr_turns;
    } else {
      const std::string gold = opening.gold_revised_answer.value_or(opening.gold_answer);
      turns.push_back({Speaker::user, opening.question, TurnTag::question});
      if (ril_base == FlowKind::ME) {
        turns.push_back({Speaker::bot, gold, TurnTag::answer});
        turns.push_back({Speaker::user, why, TurnTag::why});
        turns.push_back({Speaker::bot, opening.r_user, TurnTag::rot});
      } else {
        turns.push_back({Speaker::bot, opening.gold_answer, TurnTag::answer});
        turns.push_back({Speaker::user, join_phrase(but, opening.r_user), TurnTag::rot});
        turns.push_back({Speaker::bot, gold, TurnTag::revised_answer});
      }
    }
    ask(bot, turns, join_phrase(base, *opening.partner_question), TurnTag::new_question, TurnTag::new_answer);
    t.flows[FlowKind::RIL] = std::move(turns);
    t.ril_base = ril_base;
  }
  return t;
}

namespace {

json run_header(const SuiteOptions& options) {
  json flows = json::array();
  for (auto k : options.session.flows) flows.push_back(to_string(k));
  return json{{"event", "run"},
              {"seed", options.session.seed},
              {"k", options.session.k},
              {"lambda", options.lambda},
              {"flows", flows},
              {"ril_context", to_string(options.session.ril_context)}};
}

json scores_event(const std::string& id, const std::vector<ScoredTriple>& triples) {
  json arr = json::array();
  for (const auto& s : triples) {
    json v = s.verdict;
    v["metric"] = s.metric;
    v["question"] = s.request.question;
    v["answer"] = s.request.answer;
    v["rot"] = s.request.rot;
    arr.push_back(std::move(v));
  }
  return json{{"event", "scores"}, {"id", id}, {"triples", std::move(arr)}};
}

struct ScanResult {
  std::optional<json> header;
  std::size_t complete_bytes = 0;
  std::vector<std::string> done_ids;
  ArchiveContents contents;
  bool torn = false;
};

// Walks the archive block by block and stops at the first line that is not
// valid JSON or breaks the session -> scores -> record sequence.
ScanResult scan_archive(const std::filesystem::path& path) {
  ScanResult out;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open transcript archive " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string data = buf.str();

  enum class Want { header, block, scores, record } want = Want::header;
  std::optional<SessionTranscript> pending;
  std::string pending_id;
  std::size_t pos = 0;
  while (pos < data.size()) {
    const std::size_t nl = data.find('\n', pos);
    if (nl == std::string::npos) {
      out.torn = true;
      break;
    }
    const std::string line = data.substr(pos, nl - pos);
    const std::size_t next = nl + 1;
    if (text::trim(line).empty()) {
      pos = next;
      if (want == Want::header || want == Want::block) out.complete_bytes = pos;
      continue;
    }
    json ev;
    try {
      ev = json::parse(line);
    } catch (const json::exception&) {
      out.torn = true;
      break;
    }
    const std::string type = ev.value("event", "");
    bool ok = true;
    switch (want) {
      case Want::header:
        ok = type == "run";
        if (ok) {
          out.header = ev;
          out.contents.run = ev;
          want = Want::block;
        }
        break;
      case Want::block:
        if (type == "session") {
          pending = ev.at("transcript").get<SessionTranscript>();
          pending_id = pending->id;
          want = Want::scores;
        } else if (type == "failed") {
          out.done_ids.push_back(ev.at("id").get<std::string>());
          out.contents.failed_ids.push_back(out.done_ids.back());
        } else {
          ok = false;
        }
        break;
      case Want::scores:
        ok = type == "scores" && ev.value("id", "") == pending_id;
        if (ok) want = Want::record;
        break;
      case Want::record:
        ok = type == "record" && ev.value("id", "") == pending_id;
        if (ok) {
          out.contents.sessions.push_back(std::move(*pending));
          out.contents.records.push_back(ev.at("record").get<MetricRecord>());
          out.done_ids.push_back(pending_id);
          pending.reset();
          want = Want::block;
        }
        break;
    }
    if (!ok) {
      out.torn = true;
      break;
    }
    pos = next;
    if (want == Want::block) out.complete_bytes = pos;
  }
  if (want != Want::block && want != Want::header) out.torn = true;
  return out;
}

struct Outcome {
  std::optional<SessionTranscript> transcript;
  std::optional<ScoredSession> scored;
  std::string error;
  std::exception_ptr fatal;
};

Outcome run_one(const Opening& opening, const SuiteOptions& options, EvalClients& clients) {
  Outcome o;
  try {
    o.transcript = run_session(opening, options.session, clients);
    o.scored = score_transcript(*o.transcript, clients.scorer, options.lambda);
  } catch (const ServiceUnavailable& e) {
    if (e.service() == "chatbot") {
      o.error = e.what();
    } else {
      o.fatal = std::current_exception();
    }
  } catch (const ConfigError&) {
    o.fatal = std::current_exception();
  } catch (const Error& e) {
    o.error = e.what();
  } catch (...) {
    o.fatal = std::current_exception();
  }
  if (!o.error.empty()) spdlog::warn("session {} failed: {}", opening.id, o.error);
  return o;
}

}  // namespace

SuiteResult run_suite(const std::vector<Opening>& openings, const SuiteOptions& options, EvalClients& clients,
                      const std::filesystem::path& archive) {
  if (openings.empty()) throw InputError("no openings to evaluate");
  if (options.concurrency == 0) throw ConfigError("concurrency must be at least 1");
  {
    std::set<std::string> ids;
    for (const auto& o : openings) {
      if (!ids.insert(o.id).second) throw InputError("duplicate opening id " + o.id);
    }
  }
  if (options.session.flows.count(FlowKind::MA) && (!clients.index || clients.index->empty() || !clients.embedder)) {
    throw ConfigError("MA flow needs a non-empty safety index and an embedder");
  }
  clients.scorer.preflight();

  const json header = run_header(options);
  std::set<std::string> done;
  SuiteResult result;
  bool write_header = true;
  if (std::filesystem::exists(archive) && std::filesystem::file_size(archive) > 0) {
    ScanResult scan = scan_archive(archive);
    if (scan.header) {
      if (*scan.header != header) {
        throw ConfigError("transcript archive " + archive.string() + " was written with different settings");
      }
      write_header = false;
    }
    if (scan.torn) {
      spdlog::warn("discarding incomplete tail of {}", archive.string());
    }
    std::filesystem::resize_file(archive, scan.complete_bytes);
    std::set<std::string> known;
    for (const auto& o : openings) known.insert(o.id);
    for (const auto& id : scan.done_ids) {
      if (!known.count(id)) throw InputError("transcript archive holds unknown opening " + id);
      done.insert(id);
    }
    result.resumed = done.size();
  }

  std::ofstream out(archive, std::ios::binary | std::ios::app);
  if (!out) throw InputError("cannot write transcript archive " + archive.string());
  if (write_header) out << header.dump() << '\n' << std::flush;

  std::vector<const Opening*> todo;
  for (const auto& o : openings) {
    if (!done.count(o.id)) todo.push_back(&o);
  }
  const std::size_t total_todo = todo.size();
  if (options.max_sessions && *options.max_sessions < todo.size()) todo.resize(*options.max_sessions);
  result.complete = todo.size() == total_todo;

  std::vector<std::optional<Outcome>> slots(todo.size());
  std::mutex mu;
  std::condition_variable cv;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};

  auto worker = [&] {
    while (!abort) {
      const std::size_t i = next++;
      if (i >= todo.size()) break;
      Outcome o = run_one(*todo[i], options, clients);
      std::lock_guard lock(mu);
      slots[i] = std::move(o);
      cv.notify_all();
    }
  };
  std::vector<std::jthread> pool;
  const std::size_t n_workers = std::min(options.concurrency, std::max<std::size_t>(todo.size(), 1));
  for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);

  std::exception_ptr fatal;
  for (std::size_t i = 0; i < todo.size() && !fatal; ++i) {
    Outcome o;
    {
      std::unique_lock lock(mu);
      cv.wait(lock, [&] { return slots[i].has_value(); });
      o = std::move(*slots[i]);
    }
    if (o.fatal) {
      fatal = o.fatal;
      abort = true;
      break;
    }
    const Opening& op = *todo[i];
    if (!o.error.empty()) {
      out << json{{"event", "failed"}, {"id", op.id}, {"split", to_string(op.split)}, {"error", o.error}}.dump() << '\n';
    } else {
      out << json{{"event", "session"}, {"id", op.id}, {"transcript", *o.transcript}}.dump() << '\n';
      out << scores_event(op.id, o.scored->triples).dump() << '\n';
      out << json{{"event", "record"}, {"id", op.id}, {"record", o.scored->record}}.dump() << '\n';
    }
    out.flush();
  }
  if (fatal) {
    pool.clear();
    std::rethrow_exception(fatal);
  }
  pool.clear();
  out.close();

  ArchiveContents contents = read_archive(archive);
  result.records = std::move(contents.records);
  result.failed_ids = std::move(contents.failed_ids);

  if (result.complete) {
    const double rate = static_cast<double>(result.failed_ids.size()) / static_cast<double>(openings.size());
    if (rate > options.failure_rate_ceiling) {
      throw Error(fmt::format("{} of {} sessions failed, above the failure-rate ceiling {}", result.failed_ids.size(),
                              openings.size(), options.failure_rate_ceiling));
    }
  }
  if (!result.records.empty()) result.report = aggregate(result.records, result.failed_ids.size());
  return result;
}

ArchiveContents read_archive(const std::filesystem::path& archive) {
  if (!std::filesystem::exists(archive)) throw InputError("transcript archive not found: " + archive.string());
  ScanResult scan = scan_archive(archive);
  if (scan.torn) spdlog::warn("ignoring incomplete tail of {}", archive.string());
  return std::move(scan.contents);
}

MetricReport report_from_archive(const std::filesystem::path& archive) {
  ArchiveContents c = read_archive(archive);
  return aggregate(c.records, c.failed_ids.size());
}

std::vector<MetricRecord> rescore_archive(const std::filesystem::path& archive, AgreementScorer& scorer) {
  ArchiveContents c = read_archive(archive);
  const double lambda = c.run.value("lambda", kDefaultLambda);
  std::vector<MetricRecord> out;
  out.reserve(c.sessions.size());
  for (const auto& t : c.sessions) out.push_back(score_transcript(t, scorer, lambda).record);
  return out;
}

}  // namespace moraldial
