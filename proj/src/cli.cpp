#include "moraldial/cli.hpp"

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <set>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <httplib.h>
#include <spdlog/spdlog.h>

#include "moraldial/config.hpp"
#include "moraldial/corpus_ingest.hpp"
#include "moraldial/endpoints.hpp"
#include "moraldial/error.hpp"
#include "moraldial/flow_builder.hpp"
#include "moraldial/foundation_profile.hpp"
#include "moraldial/jsonl.hpp"
#include "moraldial/manifest.hpp"
#include "moraldial/metrics.hpp"
#include "moraldial/orchestrator.hpp"
#include "moraldial/rot_composer.hpp"
#include "moraldial/safety_index.hpp"
#include "moraldial/scorer_data.hpp"
#include "moraldial/session_server.hpp"
#include "moraldial/text.hpp"

namespace moraldial {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Shared flags of the commands that talk to services.
struct ConfigFlags {
  std::string config_file;
  std::vector<std::string> sets;  // key=value
  std::map<std::string, std::string> direct;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_file, "Config file (key = value)")->check(CLI::ExistingFile);
    cmd->add_option("--set", sets, "Override a config key (key=value), repeatable");
  }

  void add(CLI::App* cmd, const std::string& flag, const std::string& key, const std::string& help) {
    cmd->add_option_function<std::string>(flag, [this, key](const std::string& v) { direct[key] = v; }, help);
  }

  EvalConfig load() const {
    Settings flags = direct;
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
      flags[text::to_lower(text::trim(s.substr(0, eq)))] = text::trim(s.substr(eq + 1));
    }
    std::optional<fs::path> file;
    if (!config_file.empty()) file = config_file;
    return load_config(file, environment_settings(), flags);
  }
};

struct Context {
  std::vector<std::string> args;
  std::ostream& out;
  std::ostream& err;
};

RunManifest start_manifest(const std::string& command, const Context& ctx) {
  RunManifest m;
  m.command = command;
  m.arguments = ctx.args;
  m.tool_version = std::string(tool_version());
  m.started_at = utc_timestamp();
  return m;
}

void finish_manifest(RunManifest& m, const fs::path& dir) {
  m.finished_at = utc_timestamp();
  write_manifest(dir, m);
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out << content;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::vector<MetaSample> read_meta(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw InputError("input not found: " + path.string());
  return jsonl::read<MetaSample>(path);
}

std::vector<RoTRecord> read_rots(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw InputError("input not found: " + path.string());
  return jsonl::read<RoTRecord>(path);
}

std::set<FlowKind> parse_flows(const std::string& spec) {
  std::set<FlowKind> out;
  for (const auto& name : text::split_any(spec, ",")) {
    auto k = parse_flow_kind(text::to_upper(name));
    if (!k) throw ConfigError("unknown flow '" + name + "' in --flows (expected ma, me, mr, ril)");
    out.insert(*k);
  }
  if (out.empty()) throw ConfigError("--flows is empty");
  return out;
}

// ---- ingest ----------------------------------------------------------------

struct IngestArgs {
  std::string mic, social_chem, mic_columns, sc_columns, out;
};

int cmd_ingest(const IngestArgs& a, const Context& ctx) {
  RunManifest m = start_manifest("ingest", ctx);
  fs::create_directories(a.out);
  const fs::path rejections = fs::path(a.out) / "rejections.jsonl";
  write_text(rejections, "");

  ColumnMap mic_schema = ColumnMap::mic_default();
  if (!a.mic_columns.empty()) {
    mic_schema = ColumnMap::load(a.mic_columns, mic_schema);
    m.add_input(a.mic_columns);
  }
  m.add_input(a.mic);
  auto mic = load_meta_samples(a.mic, mic_schema);
  jsonl::write(fs::path(a.out) / "meta.jsonl", mic.records);
  append_rejections(rejections, mic.rejections);
  json summary = {{"meta_samples", mic.records.size()}, {"meta_rejected", mic.rejections.size()}};

  if (!a.social_chem.empty()) {
    ColumnMap sc_schema = ColumnMap::social_chem_default();
    if (!a.sc_columns.empty()) {
      sc_schema = ColumnMap::load(a.sc_columns, sc_schema);
      m.add_input(a.sc_columns);
    }
    m.add_input(a.social_chem);
    auto sc = load_socialchem_rots(a.social_chem, sc_schema);
    jsonl::write(fs::path(a.out) / "social_chem.jsonl", sc.records);
    append_rejections(rejections, sc.rejections);
    summary["social_chem_rots"] = sc.records.size();
    summary["social_chem_rejected"] = sc.rejections.size();
  }
  m.config = summary;
  finish_manifest(m, a.out);
  ctx.out << summary.dump() << '\n';
  return 0;
}

// ---- build-pretrain -------------------------------------------------------

struct PretrainArgs {
  std::string meta, social_chem, out;
  std::uint64_t seed = 0;
  double p_drop = 0.5, p_swap = 0.5;
};

int cmd_build_pretrain(const PretrainArgs& a, const Context& ctx) {
  RunManifest m = start_manifest("build-pretrain", ctx);
  m.seed = a.seed;
  std::vector<RoTRecord> rots;
  std::set<std::string> seen;
  if (!a.meta.empty()) {
    m.add_input(a.meta);
    auto samples = read_meta(a.meta);
    std::sort(samples.begin(), samples.end(), [](const auto& x, const auto& y) { return x.id < y.id; });
    for (const auto& s : samples) {
      if (seen.insert(s.rot.id).second) rots.push_back(s.rot);
    }
  }
  if (!a.social_chem.empty()) {
    m.add_input(a.social_chem);
    for (auto& r : read_rots(a.social_chem)) {
      if (seen.insert(r.id).second) rots.push_back(std::move(r));
    }
  }
  if (rots.empty()) throw InputError("no RoTs given (use --meta and/or --social-chem)");
  fs::create_directories(a.out);
  const auto corpus = emit_pretrain_corpus(rots, a.seed, {}, VariationOptions{a.p_drop, a.p_swap});
  write_pretrain_corpus(a.out, corpus);
  m.config = {{"p_drop", a.p_drop}, {"p_swap", a.p_swap}, {"duplicates_removed", corpus.duplicates_removed}};
  finish_manifest(m, a.out);
  ctx.out << fmt::format("train {} dev {} test {} (duplicates removed {})\n", corpus.train.size(), corpus.dev.size(),
                         corpus.test.size(), corpus.duplicates_removed);
  return 0;
}

// ---- build-flows ------------------------------------------------------------

struct FlowsArgs {
  std::string meta, general_dialogue, out;
  std::uint64_t seed = 0;
  int consensus_floor = 4;
  std::size_t me_multiplicity = 1;
};

int cmd_build_flows(const FlowsArgs& a, const Context& ctx) {
  RunManifest m = start_manifest("build-flows", ctx);
  m.seed = a.seed;
  m.add_input(a.meta);
  std::optional<fs::path> gd;
  if (!a.general_dialogue.empty()) {
    m.add_input(a.general_dialogue);
    gd = a.general_dialogue;
  }
  if (a.consensus_floor < 1 || a.consensus_floor > 5) throw ConfigError("--consensus-floor must be in [1, 5]");
  auto dataset = build_flows(read_meta(a.meta), BuildFlowsOptions{a.seed, a.consensus_floor, a.me_multiplicity});
  fs::create_directories(a.out);
  write_flow_dataset(a.out, dataset, gd);
  m.config = {{"consensus_floor", a.consensus_floor}, {"me_multiplicity", a.me_multiplicity}};
  finish_manifest(m, a.out);
  ctx.out << json(dataset.stats).dump(2) << '\n';
  return 0;
}

// ---- build-scorer-data ----------------------------------------------------

struct ScorerArgs {
  std::string meta, paraphrases, out;
  std::uint64_t seed = 0;
};

int cmd_build_scorer_data(const ScorerArgs& a, const Context& ctx) {
  RunManifest m = start_manifest("build-scorer-data", ctx);
  m.seed = a.seed;
  m.add_input(a.meta);
  std::optional<ParaphraseSource> para;
  if (!a.paraphrases.empty()) {
    m.add_input(a.paraphrases);
    para = ParaphraseSource::load(a.paraphrases);
  }
  ScorerDatasetOptions opts;
  opts.seed = a.seed;
  auto dataset = build_scorer_dataset(read_meta(a.meta), opts, para ? &*para : nullptr);
  for (const auto& w : dataset.warnings) spdlog::warn("{}", w);
  fs::create_directories(a.out);
  write_scorer_dataset(a.out, dataset);
  finish_manifest(m, a.out);
  ctx.out << json(dataset)["label_counts"].dump(2) << '\n';
  return 0;
}

// ---- build-index ----------------------------------------------------------

struct IndexArgs {
  std::string meta, social_chem, out;
  ConfigFlags config;
};

int cmd_build_index(IndexArgs& a, const Context& ctx) {
  RunManifest m = start_manifest("build-index", ctx);
  const EvalConfig config = a.config.load();
  std::vector<RoTRecord> mic, sc;
  if (!a.meta.empty()) {
    m.add_input(a.meta);
    auto samples = read_meta(a.meta);
    std::sort(samples.begin(), samples.end(), [](const auto& x, const auto& y) { return x.id < y.id; });
    std::set<std::string> seen;
    for (const auto& s : samples) {
      if (seen.insert(s.rot.id).second) mic.push_back(s.rot);
    }
  }
  if (!a.social_chem.empty()) {
    m.add_input(a.social_chem);
    sc = read_rots(a.social_chem);
  }
  const auto safety = select_safety_rots(mic, sc);
  if (safety.empty()) throw InputError("no RoT meets the safety criteria");
  auto embedder = make_embedder(config.embedder_url, config);
  const auto index = SafetyRoTIndex::build(safety, *embedder);
  fs::create_directories(a.out);
  index.save(fs::path(a.out) / "safety_index.jsonl");
  m.config = {{"embedder_url", config.embedder_url}, {"entries", index.size()}, {"dimension", index.dimension()}};
  finish_manifest(m, a.out);
  ctx.out << fmt::format("indexed {} safety RoTs (d={})\n", index.size(), index.dimension());
  return 0;
}

// ---- evaluate ---------------------------------------------------------------

struct EvaluateArgs {
  std::string meta, openings = "dev", flows = "ma,me,mr,ril", index, out;
  std::size_t limit = 0;
  std::size_t max_sessions = 0;
  ConfigFlags config;
};

int cmd_evaluate(EvaluateArgs& a, const Context& ctx) {
  RunManifest m = start_manifest("evaluate", ctx);
  const EvalConfig config = a.config.load();
  m.seed = config.seed;
  m.config = to_json_snapshot(config);

  const auto split = parse_split(a.openings);
  if (!split || *split == Split::train) throw ConfigError("--openings must be dev or test");
  const auto flows = parse_flows(a.flows);

  // fail fast on the scorer before any chatbot traffic
  auto scorer = make_scorer(config.scorer_url, config);
  scorer->preflight();

  m.add_input(a.meta);
  auto openings = select_openings(read_meta(a.meta), *split);
  if (a.limit > 0 && openings.size() > a.limit) openings.resize(a.limit);
  if (openings.empty()) throw InputError("no " + a.openings + " openings in " + a.meta);

  std::unique_ptr<Embedder> embedder;
  SafetyRoTIndex index;
  if (flows.count(FlowKind::MA)) {
    if (a.index.empty()) throw ConfigError("the MA flow needs --index");
    m.add_input(a.index);
    index = SafetyRoTIndex::load(a.index);
    embedder = make_embedder(config.embedder_url, config);
  }
  if (config.chatbot_url.rfind("script:", 0) == 0) m.add_input(config.chatbot_url.substr(7));
  if (config.scorer_url.rfind("mock:", 0) == 0) {
    for (const auto& p : text::split_any(config.scorer_url.substr(5), ",")) m.add_input(p);
  }
  auto chatbot = make_chatbot(config.chatbot_url, config);

  EvalClients clients{*chatbot, *scorer, embedder.get(), flows.count(FlowKind::MA) ? &index : nullptr};
  SuiteOptions options;
  options.session.flows = flows;
  options.session.k = config.k;
  options.session.seed = config.seed;
  options.session.ril_context = config.ril_context;
  options.lambda = config.lambda;
  options.concurrency = config.concurrency;
  options.failure_rate_ceiling = config.failure_rate_ceiling;
  if (a.max_sessions > 0) options.max_sessions = a.max_sessions;

  fs::create_directories(a.out);
  const fs::path archive = fs::path(a.out) / "transcripts.jsonl";
  const SuiteResult result = run_suite(openings, options, clients, archive);
  if (!result.complete) {
    ctx.out << fmt::format("stopped after {} new sessions; rerun to resume\n", a.max_sessions);
    return 0;
  }
  write_json(fs::path(a.out) / "report.json", result.report);
  const std::string table = render_table(result.report);
  write_text(fs::path(a.out) / "report.txt", table);
  finish_manifest(m, a.out);
  ctx.out << table;
  return 0;
}

// ---- foundations ------------------------------------------------------------

struct FoundationArgs {
  std::string meta, split = "test", out;
  ConfigFlags config;
};

int cmd_foundations(FoundationArgs& a, const Context& ctx) {
  RunManifest m = start_manifest("foundations", ctx);
  const EvalConfig config = a.config.load();
  m.seed = config.seed;
  m.config = to_json_snapshot(config);
  const auto split = parse_split(a.split);
  if (!split) throw ConfigError("--split must be train, dev or test");
  m.add_input(a.meta);
  const auto samples = read_meta(a.meta);

  auto classifier = make_classifier(config.foundations_url, config);
  auto chatbot = make_chatbot(config.chatbot_url, config);
  const auto questions = select_controversial(group_by_question(samples, *split));
  if (questions.empty()) throw InputError("no question has answers resting on different foundations");
  std::size_t answers = 0;
  for (const auto& q : questions) answers += q.answers.size();

  const auto generated = generate_pairs(questions, *chatbot, config.seed);
  const auto profile = foundation_ratio(generated, questions, *classifier);

  fs::create_directories(a.out);
  json gen = json::array();
  {
    std::vector<json> lines;
    for (const auto& g : generated) lines.push_back({{"question_id", g.question_id}, {"answer", g.answer}, {"rot", g.rot}});
    jsonl::write(fs::path(a.out) / "generated.jsonl", lines);
  }
  json doc = {{"questions", questions.size()}, {"answers", answers}, {"profile", profile}};
  write_json(fs::path(a.out) / "profile.json", doc);
  write_text(fs::path(a.out) / "profile.csv", profile_csv(profile));
  write_text(fs::path(a.out) / "train_proportions.csv", proportions_csv(foundation_proportions(samples, Split::train)));
  finish_manifest(m, a.out);
  ctx.out << profile_csv(profile);
  return 0;
}

// ---- report -----------------------------------------------------------------

struct ReportArgs {
  std::string in, out;
};

int cmd_report(const ReportArgs& a, const Context& ctx) {
  if (!fs::is_regular_file(a.in)) throw InputError("transcript archive not found: " + a.in);
  const auto report = report_from_archive(a.in);
  const std::string table = render_table(report);
  if (!a.out.empty()) {
    RunManifest m = start_manifest("report", ctx);
    m.add_input(a.in);
    fs::create_directories(a.out);
    write_json(fs::path(a.out) / "report.json", report);
    write_text(fs::path(a.out) / "report.txt", table);
    finish_manifest(m, a.out);
  }
  ctx.out << table;
  return 0;
}

// ---- serve ------------------------------------------------------------------

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string store;
  std::string model_a = "model-a", model_b = "model-b";
  ConfigFlags config;
};

std::atomic<httplib::Server*> g_server{nullptr};

extern "C" void stop_server(int) {
  if (auto* s = g_server.load()) s->stop();
}

int cmd_serve(ServeArgs& a, const Context& ctx) {
  const EvalConfig config = a.config.load();
  auto bot_a = make_chatbot(config.chatbot_url, config, "chatbot_url");
  auto bot_b = make_chatbot(config.chatbot_b_url, config, "chatbot_b_url");
  std::optional<fs::path> store;
  if (!a.store.empty()) store = a.store;
  SessionManager manager({a.model_a, bot_a.get()}, {a.model_b, bot_b.get()}, store);
  httplib::Server server;
  bind_session_routes(server, manager);
  g_server = &server;
  std::signal(SIGINT, stop_server);
  std::signal(SIGTERM, stop_server);
  ctx.out << fmt::format("serving sessions on {}:{}\n", a.host, a.port) << std::flush;
  const bool ok = server.listen(a.host, a.port);
  g_server = nullptr;
  if (!ok) throw Error(fmt::format("cannot listen on {}:{}", a.host, a.port));
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Moral discussion dataset builder and chatbot evaluator", "moraldial"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(tool_version()));
  Context ctx{args, out, err};

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Validate MIC / Social-Chem releases into canonical JSONL");
  c_ingest->add_option("--mic", ingest.mic, "MIC meta file")->required()->check(CLI::ExistingFile);
  c_ingest->add_option("--social-chem", ingest.social_chem, "Social-Chem-101 file")->check(CLI::ExistingFile);
  c_ingest->add_option("--mic-columns", ingest.mic_columns, "JSON column map for the MIC file")->check(CLI::ExistingFile);
  c_ingest->add_option("--social-chem-columns", ingest.sc_columns, "JSON column map for the Social-Chem file")
      ->check(CLI::ExistingFile);
  c_ingest->add_option("--out", ingest.out, "Output directory")->required();

  PretrainArgs pretrain;
  auto* c_pretrain = app.add_subcommand("build-pretrain", "Emit the RoT statement corpus");
  c_pretrain->add_option("--meta", pretrain.meta, "Canonical meta JSONL");
  c_pretrain->add_option("--social-chem", pretrain.social_chem, "Canonical Social-Chem JSONL");
  c_pretrain->add_option("--seed", pretrain.seed, "Random seed");
  c_pretrain->add_option("--p-drop", pretrain.p_drop, "Probability of dropping the situation")->check(CLI::Range(0.0, 1.0));
  c_pretrain->add_option("--p-swap", pretrain.p_swap, "Probability of fronting the situation")->check(CLI::Range(0.0, 1.0));
  c_pretrain->add_option("--out", pretrain.out, "Output directory")->required();

  FlowsArgs flows;
  auto* c_flows = app.add_subcommand("build-flows", "Build MA/ME/MR/RIL dialogue flows");
  c_flows->add_option("--meta", flows.meta, "Canonical meta JSONL")->required();
  c_flows->add_option("--seed", flows.seed, "Random seed");
  c_flows->add_option("--consensus-floor", flows.consensus_floor, "Lowest RoT consensus whose revised answer is kept");
  c_flows->add_option("--me-multiplicity", flows.me_multiplicity, "ME flows per sample, one per why-phrase");
  c_flows->add_option("--general-dialogue", flows.general_dialogue, "JSONL appended verbatim to the train split");
  c_flows->add_option("--out", flows.out, "Output directory")->required();

  ScorerArgs scorer;
  auto* c_scorer = app.add_subcommand("build-scorer-data", "Build the agreement-scorer training data");
  c_scorer->add_option("--meta", scorer.meta, "Canonical meta JSONL")->required();
  c_scorer->add_option("--paraphrases", scorer.paraphrases, "JSONL of {text, paraphrase}");
  c_scorer->add_option("--seed", scorer.seed, "Random seed");
  c_scorer->add_option("--out", scorer.out, "Output directory")->required();

  IndexArgs index;
  auto* c_index = app.add_subcommand("build-index", "Select safety RoTs and embed them");
  c_index->add_option("--meta", index.meta, "Canonical meta JSONL");
  c_index->add_option("--social-chem", index.social_chem, "Canonical Social-Chem JSONL");
  c_index->add_option("--out", index.out, "Output directory")->required();
  index.config.attach(c_index);
  index.config.add(c_index, "--embedder", "embedder_url", "Embedder endpoint");

  EvaluateArgs evaluate;
  auto* c_eval = app.add_subcommand("evaluate", "Run the evaluation flows against a chatbot");
  c_eval->add_option("--meta", evaluate.meta, "Canonical meta JSONL")->required();
  c_eval->add_option("--openings", evaluate.openings, "dev or test");
  c_eval->add_option("--flows", evaluate.flows, "Comma-separated subset of ma,me,mr,ril");
  c_eval->add_option("--index", evaluate.index, "Safety RoT index (needed for ma)");
  c_eval->add_option("--limit", evaluate.limit, "Use only the first N openings");
  c_eval->add_option("--max-sessions", evaluate.max_sessions, "Stop after N new sessions (resume later)");
  c_eval->add_option("--out", evaluate.out, "Output directory")->required();
  evaluate.config.attach(c_eval);
  evaluate.config.add(c_eval, "--seed", "seed", "Random seed");
  evaluate.config.add(c_eval, "--k", "k", "Safety RoTs retrieved per answer");
  evaluate.config.add(c_eval, "--lambda", "lambda", "Revision-failure threshold");
  evaluate.config.add(c_eval, "--scorer", "scorer_url", "Agreement scorer endpoint");
  evaluate.config.add(c_eval, "--embedder", "embedder_url", "Embedder endpoint");
  evaluate.config.add(c_eval, "--chatbot", "chatbot_url", "Chatbot endpoint");
  evaluate.config.add(c_eval, "--concurrency", "concurrency", "Concurrent sessions");
  evaluate.config.add(c_eval, "--ril-context", "ril_context", "gold or model");

  FoundationArgs found;
  auto* c_found = app.add_subcommand("foundations", "Profile a chatbot's moral-foundation tendencies");
  c_found->add_option("--meta", found.meta, "Canonical meta JSONL")->required();
  c_found->add_option("--split", found.split, "Split to draw questions from");
  c_found->add_option("--out", found.out, "Output directory")->required();
  found.config.attach(c_found);
  found.config.add(c_found, "--seed", "seed", "Random seed");
  found.config.add(c_found, "--chatbot", "chatbot_url", "Chatbot endpoint");
  found.config.add(c_found, "--classifier", "foundations_url", "Foundation classifier endpoint");

  ReportArgs report;
  auto* c_report = app.add_subcommand("report", "Aggregate a transcript archive");
  c_report->add_option("--in", report.in, "Transcript archive (JSONL)")->required();
  c_report->add_option("--out", report.out, "Output directory for report.json and report.txt");

  ServeArgs serve;
  auto* c_serve = app.add_subcommand("serve", "Serve paired sessions for human evaluation");
  c_serve->add_option("--host", serve.host, "Bind address");
  c_serve->add_option("--port", serve.port, "Port");
  c_serve->add_option("--store", serve.store, "Directory for session snapshots");
  c_serve->add_option("--model-a", serve.model_a, "Name recorded for the first chatbot");
  c_serve->add_option("--model-b", serve.model_b, "Name recorded for the second chatbot");
  serve.config.attach(c_serve);
  serve.config.add(c_serve, "--chatbot", "chatbot_url", "First chatbot endpoint");
  serve.config.add(c_serve, "--chatbot-b", "chatbot_b_url", "Second chatbot endpoint");

  std::vector<const char*> argv;
  argv.push_back("moraldial");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    // --help and --version exit 0; every other parse failure is a usage error
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    if (c_ingest->parsed()) return cmd_ingest(ingest, ctx);
    if (c_pretrain->parsed()) return cmd_build_pretrain(pretrain, ctx);
    if (c_flows->parsed()) return cmd_build_flows(flows, ctx);
    if (c_scorer->parsed()) return cmd_build_scorer_data(scorer, ctx);
    if (c_index->parsed()) return cmd_build_index(index, ctx);
    if (c_eval->parsed()) return cmd_evaluate(evaluate, ctx);
    if (c_found->parsed()) return cmd_foundations(found, ctx);
    if (c_report->parsed()) return cmd_report(report, ctx);
    if (c_serve->parsed()) return cmd_serve(serve, ctx);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  err << app.help();
  return 2;
}

}  // namespace moraldial
