#include "moraldial/agreement.hpp"

#include <cmath>
#include <limits>

#include "moraldial/error.hpp"
#include "moraldial/jsonl.hpp"
#include "moraldial/text.hpp"

namespace moraldial {

using nlohmann::json;

namespace {

// Sums this close to 1 are rounding noise from the producer and left alone.
constexpr double kRenormalizeThreshold = 8 * std::numeric_limits<double>::epsilon();

void check_probability(double p, const char* name) {
  if (!std::isfinite(p) || p < 0.0 || p > 1.0 + kProbabilityTolerance) {
    throw InputError(std::string("probability ") + name + " = " + std::to_string(p) + " is not in [0, 1]");
  }
}

}  // namespace

AgreementVerdict AgreementVerdict::from_probabilities(double p_agree, double p_neutral, double p_disagree) {
  check_probability(p_agree, "p_agree");
  check_probability(p_neutral, "p_neutral");
  check_probability(p_disagree, "p_disagree");
  // grouped so that swapping p_agree and p_disagree leaves the sum bit-identical
  const double sum = p_neutral + (p_agree + p_disagree);
  if (std::abs(sum - 1.0) > kProbabilityTolerance) {
    throw InputError("probabilities sum to " + std::to_string(sum) + ", not 1");
  }
  AgreementVerdict v{p_agree, p_neutral, p_disagree, 0.0};
  if (std::abs(sum - 1.0) > kRenormalizeThreshold) {
    v.p_agree /= sum;
    v.p_neutral /= sum;
    v.p_disagree /= sum;
  }
  v.as_score = v.p_agree - v.p_disagree;
  return v;
}

double agreement_score(double p_agree, double p_neutral, double p_disagree) {
  return AgreementVerdict::from_probabilities(p_agree, p_neutral, p_disagree).as_score;
}

void to_json(json& j, const AgreementVerdict& v) {
  j = json{{"p_agree", v.p_agree}, {"p_neutral", v.p_neutral}, {"p_disagree", v.p_disagree}, {"as", v.as_score}};
}

void from_json(const json& j, AgreementVerdict& v) {
  v = AgreementVerdict::from_probabilities(j.at("p_agree").get<double>(), j.at("p_neutral").get<double>(),
                                           j.at("p_disagree").get<double>());
}

json to_wire(const ScoreRequest& r) { return json{{"question", r.question}, {"answer", r.answer}, {"rot", r.rot}}; }

AgreementVerdict verdict_from_wire(const json& j) {
  if (!j.is_object()) throw ProtocolError("scorer response is not an object");
  for (const char* key : {"p_agree", "p_neutral", "p_disagree"}) {
    if (!j.contains(key) || !j[key].is_number()) {
      throw ProtocolError(std::string("scorer response lacks numeric '") + key + "'");
    }
  }
  try {
    return AgreementVerdict::from_probabilities(j["p_agree"].get<double>(), j["p_neutral"].get<double>(),
                                                j["p_disagree"].get<double>());
  } catch (const InputError& e) {
    throw ProtocolError(std::string("scorer response: ") + e.what());
  }
}

AgreementVerdict AgreementScorer::score(const ScoreRequest& request) {
  if (text::trim(request.question).empty()) throw InputError("score: question is empty");
  if (text::trim(request.answer).empty()) throw InputError("score: answer is empty");
  if (text::trim(request.rot).empty()) throw InputError("score: rot is empty");
  return do_score(request);
}

std::vector<BatchItem> AgreementScorer::score_batch(std::span<const ScoreRequest> items) {
  if (items.empty()) throw InputError("score_batch: empty batch");
  return do_score_batch(items);
}

std::vector<BatchItem> AgreementScorer::do_score_batch(std::span<const ScoreRequest> items) {
  std::vector<BatchItem> out;
  out.reserve(items.size());
  for (const auto& item : items) {
    try {
      out.push_back({score(item), {}});
    } catch (const Error& e) {
      out.push_back({std::nullopt, e.what()});
    }
  }
  return out;
}

ScorerClient::ScorerClient(std::string endpoint, std::chrono::milliseconds timeout, RetryPolicy retry)
    : http_("scorer", std::move(endpoint), timeout, retry) {}

void ScorerClient::preflight() {
  // A probe request; only reachability matters here.
  try {
    (void)http_.post("/score", to_wire({"preflight", "preflight", "preflight"}));
  } catch (const ProtocolError&) {
  }
}

AgreementVerdict ScorerClient::do_score(const ScoreRequest& request) {
  return verdict_from_wire(http_.post("/score", to_wire(request)));
}

std::vector<BatchItem> ScorerClient::do_score_batch(std::span<const ScoreRequest> items) {
  json body = {{"items", json::array()}};
  std::vector<std::size_t> sent;
  std::vector<BatchItem> out(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& r = items[i];
    if (text::trim(r.question).empty() || text::trim(r.answer).empty() || text::trim(r.rot).empty()) {
      out[i].error = "empty question, answer or rot";
      continue;
    }
    body["items"].push_back(to_wire(r));
    sent.push_back(i);
  }
  if (sent.empty()) return out;

  json response;
  try {
    response = http_.post("/score_batch", body);
  } catch (const Error& e) {
    for (auto i : sent) out[i].error = e.what();
    return out;
  }
  const json* results = response.is_object() && response.contains("results") ? &response["results"] : nullptr;
  if (results == nullptr || !results->is_array() || results->size() != sent.size()) {
    for (auto i : sent) out[i].error = "scorer batch response malformed";
    return out;
  }
  for (std::size_t k = 0; k < sent.size(); ++k) {
    const auto& item = (*results)[k];
    if (item.is_object() && item.contains("error")) {
      out[sent[k]].error = item["error"].is_string() ? item["error"].get<std::string>() : item["error"].dump();
      continue;
    }
    try {
      out[sent[k]].verdict = verdict_from_wire(item);
    } catch (const ProtocolError& e) {
      out[sent[k]].error = e.what();
    }
  }
  return out;
}

std::string MockScorer::key_of(const ScoreRequest& r) {
  return text::sha256_hex(r.question + '\x1f' + r.answer + '\x1f' + r.rot);
}

MockScorer MockScorer::load(std::span<const std::filesystem::path> fixture_files) {
  MockScorer mock;
  for (const auto& path : fixture_files) {
    for (const auto& j : jsonl::read_all(path)) {
      ScoreRequest key{j.at("question").get<std::string>(), j.at("answer").get<std::string>(),
                       j.at("rot").get<std::string>()};
      mock.add(key, AgreementVerdict::from_probabilities(j.at("p_agree").get<double>(), j.at("p_neutral").get<double>(),
                                                         j.at("p_disagree").get<double>()));
    }
  }
  return mock;
}

void MockScorer::add(const ScoreRequest& key, const AgreementVerdict& verdict) { table_[key_of(key)] = verdict; }

AgreementVerdict MockScorer::do_score(const ScoreRequest& request) {
  if (auto it = table_.find(key_of(request)); it != table_.end()) return it->second;
  return AgreementVerdict::from_probabilities(0.0, 1.0, 0.0);
}

}  // namespace moraldial
