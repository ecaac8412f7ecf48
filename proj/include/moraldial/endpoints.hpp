#pragma once

#include <memory>
#include <string>

#include "moraldial/agreement.hpp"
#include "moraldial/chatbot.hpp"
#include "moraldial/config.hpp"
#include "moraldial/embedding.hpp"
#include "moraldial/foundation_profile.hpp"

namespace moraldial {

/// Builds clients from endpoint strings (see EvalConfig). `what` names the
/// setting in error messages.
std::unique_ptr<AgreementScorer> make_scorer(const std::string& endpoint, const EvalConfig& config);
std::unique_ptr<Embedder> make_embedder(const std::string& endpoint, const EvalConfig& config);
std::unique_ptr<ChatbotClient> make_chatbot(const std::string& endpoint, const EvalConfig& config,
                                            const std::string& what = "chatbot_url");
std::unique_ptr<FoundationClassifier> make_classifier(const std::string& endpoint, const EvalConfig& config);

}  // namespace moraldial
