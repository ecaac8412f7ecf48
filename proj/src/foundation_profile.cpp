#include "moraldial/foundation_profile.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "moraldial/error.hpp"
#include "moraldial/jsonl.hpp"
#include "moraldial/orchestrator.hpp"
#include "moraldial/random.hpp"
#include "moraldial/text.hpp"

namespace moraldial {

using nlohmann::json;

FoundationClient::FoundationClient(std::string endpoint, std::chrono::milliseconds timeout, RetryPolicy retry)
    : http_("foundation classifier", std::move(endpoint), timeout, retry) {}

FoundationProbabilities FoundationClient::classify(const std::string& rot) {
  return probabilities_from_wire(http_.post("/foundations", json{{"rot", rot}}));
}

FoundationProbabilities probabilities_from_wire(const json& j) {
  if (!j.is_object() || !j.contains("probabilities") || !j["probabilities"].is_object()) {
    throw ProtocolError("foundation response lacks a 'probabilities' object");
  }
  const auto& p = j["probabilities"];
  FoundationProbabilities out{};
  for (std::size_t i = 0; i < kAllFoundations.size(); ++i) {
    const std::string name(to_string(kAllFoundations[i]));
    if (!p.contains(name) || !p[name].is_number()) throw ProtocolError("foundation response lacks '" + name + "'");
    const double v = p[name].get<double>();
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw ProtocolError(fmt::format("foundation probability {} = {} is outside [0, 1]", name, v));
    }
    out[i] = v;
  }
  return out;
}

json probabilities_to_wire(const FoundationProbabilities& p) {
  json probs = json::object();
  for (std::size_t i = 0; i < kAllFoundations.size(); ++i) probs[std::string(to_string(kAllFoundations[i]))] = p[i];
  return json{{"probabilities", probs}};
}

MockFoundationClassifier MockFoundationClassifier::load(const std::filesystem::path& path) {
  MockFoundationClassifier m;
  for (const auto& j : jsonl::read_all(path)) {
    try {
      m.add(j.at("rot").get<std::string>(), probabilities_from_wire(j));
    } catch (const Error& e) {
      throw InputError(path.string() + ": " + e.what());
    } catch (const json::exception& e) {
      throw InputError(path.string() + ": " + e.what());
    }
  }
  return m;
}

FoundationProbabilities MockFoundationClassifier::classify(const std::string& rot) {
  auto it = table_.find(rot);
  return it == table_.end() ? FoundationProbabilities{} : it->second;
}

std::vector<QuestionAnswers> group_by_question(const std::vector<MetaSample>& samples, Split split) {
  std::vector<const MetaSample*> sorted;
  for (const auto& s : samples) {
    if (s.split == split) sorted.push_back(&s);
  }
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->id < b->id; });

  std::vector<QuestionAnswers> out;
  std::map<std::string, std::size_t> index;
  for (const MetaSample* s : sorted) {
    const auto key = text::to_lower(text::trim(s->question));
    auto [it, fresh] = index.emplace(key, out.size());
    if (fresh) out.push_back({s->id, s->question, {}});
    auto& answers = out[it->second].answers;
    auto a = std::find_if(answers.begin(), answers.end(), [&](const auto& x) { return x.text == s->answer; });
    if (a == answers.end()) {
      answers.push_back({s->answer, s->rot.foundations});
    } else {
      for (auto f : s->rot.foundations.members()) a->foundations.insert(f);
    }
  }
  return out;
}

std::vector<QuestionAnswers> select_controversial(const std::vector<QuestionAnswers>& questions) {
  std::vector<QuestionAnswers> out;
  for (const auto& q : questions) {
    std::optional<FoundationSet> first;
    bool differs = false;
    for (const auto& a : q.answers) {
      if (a.foundations.empty()) continue;
      if (!first) {
        first = a.foundations;
      } else if (!(a.foundations == *first)) {
        differs = true;
        break;
      }
    }
    if (differs) out.push_back(q);
  }
  return out;
}

std::vector<GeneratedPair> generate_pairs(const std::vector<QuestionAnswers>& questions, ChatbotClient& chatbot,
                                          std::uint64_t seed) {
  std::vector<GeneratedPair> out;
  out.reserve(questions.size());
  for (const auto& q : questions) {
    Rng rng(seed, q.id);
    auto turns = run_me_exchange(chatbot, q.question, rng);
    out.push_back({q.id, turns[1].text, turns[3].text});
  }
  return out;
}

FoundationProfile foundation_ratio(const std::vector<FoundationProbabilities>& generated,
                                   const std::vector<QuestionAnswers>& annotated) {
  FoundationProfile p;
  for (std::size_t i = 0; i < kAllFoundations.size(); ++i) {
    auto& e = p.entries[i];
    e.foundation = kAllFoundations[i];
    std::vector<double> values;
    values.reserve(generated.size());
    for (const auto& g : generated) {
      if (!std::isfinite(g[i]) || g[i] < 0.0) throw InputError("foundation probabilities must be finite and non-negative");
      values.push_back(g[i]);
    }
    // summing in sorted order keeps the profile independent of question order
    std::sort(values.begin(), values.end());
    for (double v : values) e.numerator += v;
    for (const auto& q : annotated) {
      for (const auto& a : q.answers) e.denominator += a.foundations.contains(e.foundation) ? 1 : 0;
    }
    if (e.denominator > 0) {
      e.ratio = e.numerator / static_cast<double>(e.denominator);
    } else {
      spdlog::warn("no annotated answer rests on {}; its ratio is omitted", to_string(e.foundation));
    }
  }
  return p;
}

FoundationProfile foundation_ratio(const std::vector<GeneratedPair>& generated,
                                   const std::vector<QuestionAnswers>& annotated, FoundationClassifier& classifier) {
  std::vector<FoundationProbabilities> probs;
  probs.reserve(generated.size());
  for (const auto& g : generated) probs.push_back(classifier.classify(g.rot));
  return foundation_ratio(probs, annotated);
}

void to_json(json& j, const FoundationProfile& p) {
  j = json::object();
  for (const auto& e : p.entries) {
    json row = {{"numerator", e.numerator}, {"denominator", e.denominator}};
    row["ratio"] = e.ratio ? json(*e.ratio) : json(nullptr);
    j[std::string(to_string(e.foundation))] = std::move(row);
  }
}

std::string profile_csv(const FoundationProfile& p) {
  std::ostringstream out;
  out << "foundation,numerator,denominator,ratio\n";
  for (const auto& e : p.entries) {
    out << to_string(e.foundation) << ',' << fmt::format("{}", e.numerator) << ',' << e.denominator << ','
        << (e.ratio ? fmt::format("{}", *e.ratio) : std::string()) << '\n';
  }
  return out.str();
}

std::vector<FoundationShare> foundation_proportions(const std::vector<MetaSample>& samples, Split split) {
  std::vector<FoundationShare> out;
  for (auto f : kAllFoundations) out.push_back({f, 0, 0.0});
  std::size_t labels = 0;
  for (const auto& q : group_by_question(samples, split)) {
    for (const auto& a : q.answers) {
      for (std::size_t i = 0; i < kAllFoundations.size(); ++i) {
        if (a.foundations.contains(kAllFoundations[i])) {
          ++out[i].answers;
          ++labels;
        }
      }
    }
  }
  if (labels > 0) {
    for (auto& s : out) s.share = static_cast<double>(s.answers) / static_cast<double>(labels);
  }
  return out;
}

std::string proportions_csv(const std::vector<FoundationShare>& shares) {
  std::ostringstream out;
  out << "foundation,answers,share\n";
  for (const auto& s : shares) out << to_string(s.foundation) << ',' << s.answers << ',' << fmt::format("{}", s.share) << '\n';
  return out.str();
}

}  // namespace moraldial
