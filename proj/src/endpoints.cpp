#include "moraldial/endpoints.hpp"

#include <vector>

#include <fmt/format.h>

#include "moraldial/error.hpp"
#include "moraldial/text.hpp"

namespace moraldial {

namespace {

bool has_scheme(const std::string& endpoint, std::string_view scheme) {
  return endpoint.size() > scheme.size() && endpoint.compare(0, scheme.size(), scheme) == 0;
}

bool is_http(const std::string& endpoint) { return has_scheme(endpoint, "http://") || has_scheme(endpoint, "https://"); }

RetryPolicy retry_of(const EvalConfig& c) { return RetryPolicy{c.retries, std::chrono::milliseconds(200)}; }

void require(const std::string& endpoint, const std::string& key) {
  if (endpoint.empty()) {
    throw ConfigError(fmt::format("no endpoint configured for '{}' (set it in the config file, via {}{} or by flag)",
                                  key, kEnvPrefix, text::to_upper(key)));
  }
}

[[noreturn]] void unsupported(const std::string& endpoint, const std::string& key) {
  throw ConfigError(fmt::format("unsupported endpoint '{}' for '{}'", endpoint, key));
}

}  // namespace

std::unique_ptr<AgreementScorer> make_scorer(const std::string& endpoint, const EvalConfig& config) {
  require(endpoint, "scorer_url");
  if (has_scheme(endpoint, "mock:")) {
    std::vector<std::filesystem::path> files;
    for (const auto& p : text::split_any(endpoint.substr(5), ",")) files.emplace_back(p);
    return std::make_unique<MockScorer>(MockScorer::load(files));
  }
  if (is_http(endpoint)) {
    return std::make_unique<ScorerClient>(endpoint, std::chrono::milliseconds(config.timeout_ms), retry_of(config));
  }
  unsupported(endpoint, "scorer_url");
}

std::unique_ptr<Embedder> make_embedder(const std::string& endpoint, const EvalConfig& config) {
  require(endpoint, "embedder_url");
  if (has_scheme(endpoint, "hashing:")) {
    std::size_t dim = 0;
    try {
      dim = std::stoul(endpoint.substr(8));
    } catch (const std::exception&) {
      unsupported(endpoint, "embedder_url");
    }
    if (dim == 0) unsupported(endpoint, "embedder_url");
    return std::make_unique<HashingEmbedder>(dim);
  }
  if (is_http(endpoint)) {
    return std::make_unique<EmbeddingClient>(endpoint, std::chrono::milliseconds(config.timeout_ms), retry_of(config));
  }
  unsupported(endpoint, "embedder_url");
}

std::unique_ptr<ChatbotClient> make_chatbot(const std::string& endpoint, const EvalConfig& config,
                                            const std::string& what) {
  require(endpoint, what);
  if (has_scheme(endpoint, "script:")) return std::make_unique<ScriptedChatbot>(ScriptedChatbot::load(endpoint.substr(7)));
  if (is_http(endpoint)) {
    return std::make_unique<HttpChatbotClient>(endpoint, std::chrono::milliseconds(config.timeout_ms), retry_of(config));
  }
  unsupported(endpoint, what);
}

std::unique_ptr<FoundationClassifier> make_classifier(const std::string& endpoint, const EvalConfig& config) {
  require(endpoint, "foundations_url");
  if (has_scheme(endpoint, "mock:")) {
    return std::make_unique<MockFoundationClassifier>(MockFoundationClassifier::load(endpoint.substr(5)));
  }
  if (is_http(endpoint)) {
    return std::make_unique<FoundationClient>(endpoint, std::chrono::milliseconds(config.timeout_ms), retry_of(config));
  }
  unsupported(endpoint, "foundations_url");
}

}  // namespace moraldial
