#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "moraldial/agreement.hpp"
#include "moraldial/chatbot.hpp"
#include "moraldial/embedding.hpp"
#include "moraldial/flow_builder.hpp"
#include "moraldial/metrics.hpp"
#include "moraldial/safety_index.hpp"
#include "moraldial/types.hpp"

namespace moraldial {

/// A discussion opening: a held-out question plus the user RoT the simulated
/// user keeps to itself until the debate turn.
struct Opening {
  std::string id;
  Split split = Split::dev;
  std::string question;
  std::string rot_id;
  std::string r_user;  // rendered statement
  std::string gold_answer;
  std::optional<std::string> gold_revised_answer;
  std::optional<std::string> partner_question;  // same RoT, different question
};

/// One opening per distinct question of `split`, taken from the lowest-id
/// sample asking it, in id order. The partner is the next distinct same-RoT
/// question in id order, wrapping around.
std::vector<Opening> select_openings(std::vector<MetaSample> samples, Split split);

enum class RilContext { model, gold };

std::string_view to_string(RilContext c);
std::optional<RilContext> parse_ril_context(std::string_view s);

/// Everything a session exchanged with the chatbot, enough to recompute every
/// metric offline.
struct SessionTranscript {
  std::string id;
  Split split = Split::dev;
  std::string question;
  std::string rot_id;
  std::string r_user;
  std::optional<std::string> partner_question;
  std::map<FlowKind, std::vector<Turn>> flows;
  std::vector<Retrieved> retrieved;  // MA safety RoTs
  std::optional<FlowKind> ril_base;
};

void to_json(nlohmann::json& j, const SessionTranscript& t);
void from_json(const nlohmann::json& j, SessionTranscript& t);

struct ScoredTriple {
  std::string metric;
  ScoreRequest request;
  AgreementVerdict verdict;
};

struct ScoredSession {
  MetricRecord record;
  std::vector<ScoredTriple> triples;
};

/// Computes the metric record of a finished transcript.
ScoredSession score_transcript(const SessionTranscript& t, AgreementScorer& scorer, double lambda);

struct EvalClients {
  ChatbotClient& chatbot;
  AgreementScorer& scorer;
  Embedder* embedder = nullptr;            // required for MA
  const SafetyRoTIndex* index = nullptr;   // required for MA
};

struct SessionOptions {
  std::set<FlowKind> flows = {FlowKind::MA, FlowKind::ME, FlowKind::MR, FlowKind::RIL};
  std::size_t k = 5;
  std::uint64_t seed = 0;
  RilContext ril_context = RilContext::model;
};

/// Talks to the chatbot for every requested flow of one opening.
///
/// The opening exchange Q -> A is shared; ME and MR continue from it and RIL
/// continues from ME when it ran, else from MR. RIL is skipped when the
/// opening has no partner question. The user RoT is sent only in the MR
/// debate turn.
SessionTranscript run_session(const Opening& opening, const SessionOptions& options, EvalClients& clients);

/// Q -> A -> why-phrase -> R_bot with the chatbot; returns the four turns.
std::vector<Turn> run_me_exchange(ChatbotClient& chatbot, const std::string& question, Rng& rng);

struct SuiteOptions {
  SessionOptions session;
  double lambda = kDefaultLambda;
  std::size_t concurrency = 1;
  double failure_rate_ceiling = 0.2;
  /// Stop after committing this many new sessions (simulated interruption).
  std::optional<std::size_t> max_sessions;
};

struct SuiteResult {
  std::vector<MetricRecord> records;  // opening order
  std::vector<std::string> failed_ids;
  std::size_t resumed = 0;
  bool complete = true;
  MetricReport report;
};

/// Runs every opening and appends its events to the transcript archive.
///
/// The archive starts with a "run" event holding the settings; each opening
/// then adds "session", "scores" and "record" events, or one "failed" event.
/// Blocks are written in opening order. On restart, complete blocks are kept,
/// a torn trailing block is discarded and finished openings are skipped.
/// Throws Error when the share of failed sessions exceeds the ceiling.
SuiteResult run_suite(const std::vector<Opening>& openings, const SuiteOptions& options, EvalClients& clients,
                      const std::filesystem::path& archive);

struct ArchiveContents {
  nlohmann::json run;
  std::vector<SessionTranscript> sessions;
  std::vector<MetricRecord> records;     // as persisted
  std::vector<std::string> failed_ids;
};

ArchiveContents read_archive(const std::filesystem::path& archive);

/// Per-split report from the persisted records of an archive.
MetricReport report_from_archive(const std::filesystem::path& archive);

/// Recomputes every record of the archive from its transcripts.
std::vector<MetricRecord> rescore_archive(const std::filesystem::path& archive, AgreementScorer& scorer);

}  // namespace moraldial
