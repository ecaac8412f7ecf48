#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "moraldial/chatbot.hpp"
#include "moraldial/http_json.hpp"
#include "moraldial/types.hpp"

namespace moraldial {

/// Independent per-foundation probabilities, indexed like kAllFoundations.
using FoundationProbabilities = std::array<double, 6>;

class FoundationClassifier {
 public:
  virtual ~FoundationClassifier() = default;
  virtual FoundationProbabilities classify(const std::string& rot) = 0;
};

/// POST /foundations {"rot"} -> {"probabilities": {"care": p, ...}} with all six
/// foundations in [0, 1].
class FoundationClient final : public FoundationClassifier {
 public:
  FoundationClient(std::string endpoint, std::chrono::milliseconds timeout = std::chrono::seconds(30),
                   RetryPolicy retry = {});
  FoundationProbabilities classify(const std::string& rot) override;

 private:
  HttpJsonClient http_;
};

/// Parses the "probabilities" object; ProtocolError unless all six values are in [0, 1].
FoundationProbabilities probabilities_from_wire(const nlohmann::json& j);
nlohmann::json probabilities_to_wire(const FoundationProbabilities& p);

/// Exact lookup by RoT text; unknown RoTs get all zeros.
class MockFoundationClassifier final : public FoundationClassifier {
 public:
  /// Lines of {"rot": ..., "probabilities": {...}}.
  static MockFoundationClassifier load(const std::filesystem::path& path);
  void add(const std::string& rot, const FoundationProbabilities& p) { table_[rot] = p; }
  FoundationProbabilities classify(const std::string& rot) override;

 private:
  std::unordered_map<std::string, FoundationProbabilities> table_;
};

struct AnnotatedAnswer {
  std::string text;
  FoundationSet foundations;
};

struct QuestionAnswers {
  std::string id;  // lowest sample id asking the question
  std::string question;
  std::vector<AnnotatedAnswer> answers;
};

/// Groups samples of `split` by question; an answer's foundations are the
/// union over the RoTs it was annotated with.
std::vector<QuestionAnswers> group_by_question(const std::vector<MetaSample>& samples, Split split);

/// Keeps the questions with at least two answers whose foundation sets differ.
std::vector<QuestionAnswers> select_controversial(const std::vector<QuestionAnswers>& questions);

struct GeneratedPair {
  std::string question_id;
  std::string answer;
  std::string rot;  // the chatbot's own explanation
};

/// One (answer, RoT) pair per question from an ME exchange with the chatbot.
std::vector<GeneratedPair> generate_pairs(const std::vector<QuestionAnswers>& questions, ChatbotClient& chatbot,
                                          std::uint64_t seed);

struct FoundationEntry {
  Foundation foundation = Foundation::care;
  double numerator = 0;
  std::size_t denominator = 0;
  std::optional<double> ratio;  // absent when the denominator is 0
};

struct FoundationProfile {
  std::array<FoundationEntry, 6> entries;
};

/// R_f = sum of P(generated RoT has f) / number of annotated answers with f.
/// The probabilities are summed as they are, never thresholded.
FoundationProfile foundation_ratio(const std::vector<GeneratedPair>& generated,
                                   const std::vector<QuestionAnswers>& annotated, FoundationClassifier& classifier);

/// Same, from already-classified probabilities.
FoundationProfile foundation_ratio(const std::vector<FoundationProbabilities>& generated,
                                   const std::vector<QuestionAnswers>& annotated);

void to_json(nlohmann::json& j, const FoundationProfile& p);
/// foundation,numerator,denominator,ratio
std::string profile_csv(const FoundationProfile& p);

struct FoundationShare {
  Foundation foundation = Foundation::care;
  std::size_t answers = 0;
  double share = 0;  // of all foundation labels, sums to 1 over foundations
};

/// Foundation proportions of the distinct answers of `split`.
std::vector<FoundationShare> foundation_proportions(const std::vector<MetaSample>& samples, Split split);
std::string proportions_csv(const std::vector<FoundationShare>& shares);

}  // namespace moraldial
