#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "moraldial/http_json.hpp"

namespace moraldial {

/// Allowed deviation of a probability triple's sum from 1.
inline constexpr double kProbabilityTolerance = 1e-6;

/// Answer-RoT agreement: p_agree - p_disagree, in [-1, 1].
///
/// Throws InputError when a probability is negative or not finite, or when the
/// triple's sum is off by more than kProbabilityTolerance. Triples inside the
/// tolerance are renormalized before the difference is taken.
double agreement_score(double p_agree, double p_neutral, double p_disagree);

struct AgreementVerdict {
  double p_agree = 0;
  double p_neutral = 1;
  double p_disagree = 0;
  double as_score = 0;

  static AgreementVerdict from_probabilities(double p_agree, double p_neutral, double p_disagree);

  friend bool operator==(const AgreementVerdict&, const AgreementVerdict&) = default;
};

void to_json(nlohmann::json& j, const AgreementVerdict& v);
void from_json(const nlohmann::json& j, AgreementVerdict& v);

struct ScoreRequest {
  std::string question;
  std::string answer;
  std::string rot;
};

struct BatchItem {
  std::optional<AgreementVerdict> verdict;
  std::string error;

  bool ok() const { return verdict.has_value(); }
};

/// Three-way answer-vs-RoT agreement scorer. The question is always part of the
/// request.
class AgreementScorer {
 public:
  virtual ~AgreementScorer() = default;

  /// Throws InputError if any of the three texts is empty.
  AgreementVerdict score(const ScoreRequest& request);
  AgreementVerdict score(std::string question, std::string answer, std::string rot) {
    return score(ScoreRequest{std::move(question), std::move(answer), std::move(rot)});
  }

  /// Order-preserving; a failing item gets an error marker instead of aborting
  /// the batch. Throws InputError on an empty batch.
  std::vector<BatchItem> score_batch(std::span<const ScoreRequest> items);

  /// Fails fast with ServiceUnavailable when the scorer cannot be reached.
  virtual void preflight() {}

 protected:
  virtual AgreementVerdict do_score(const ScoreRequest& request) = 0;
  virtual std::vector<BatchItem> do_score_batch(std::span<const ScoreRequest> items);
};

/// Client for a scorer service speaking POST /score and POST /score_batch.
class ScorerClient final : public AgreementScorer {
 public:
  ScorerClient(std::string endpoint, std::chrono::milliseconds timeout = std::chrono::seconds(30), RetryPolicy retry = {});

  void preflight() override;

 protected:
  AgreementVerdict do_score(const ScoreRequest& request) override;
  std::vector<BatchItem> do_score_batch(std::span<const ScoreRequest> items) override;

 private:
  HttpJsonClient http_;
};

/// Hermetic scorer: exact lookup keyed by (question, answer, rot); anything
/// unknown scores as pure neutral (0, 1, 0).
class MockScorer final : public AgreementScorer {
 public:
  MockScorer() = default;

  /// Fixture lines: {"question", "answer", "rot", "p_agree", "p_neutral", "p_disagree"}.
  static MockScorer load(std::span<const std::filesystem::path> fixture_files);

  void add(const ScoreRequest& key, const AgreementVerdict& verdict);
  std::size_t size() const { return table_.size(); }

  static std::string key_of(const ScoreRequest& request);

 protected:
  AgreementVerdict do_score(const ScoreRequest& request) override;

 private:
  std::unordered_map<std::string, AgreementVerdict> table_;
};

nlohmann::json to_wire(const ScoreRequest& request);
/// Parses {"p_agree", "p_neutral", "p_disagree"}; ProtocolError on anything else.
AgreementVerdict verdict_from_wire(const nlohmann::json& j);

}  // namespace moraldial
