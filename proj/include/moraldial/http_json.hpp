#pragma once

#include <chrono>
#include <string>

#include <json.hpp>

namespace moraldial {

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds backoff{200};
};

/// Stateless JSON-over-HTTP POST client. Each call opens its own connection, so
/// one instance may be shared by concurrent callers.
///
/// Transport failures and 5xx responses are retried; when the attempts are
/// exhausted a ServiceUnavailable naming `service` is thrown. 4xx responses and
/// non-JSON bodies raise ProtocolError.
class HttpJsonClient {
 public:
  HttpJsonClient(std::string service, std::string base_url, std::chrono::milliseconds timeout = std::chrono::seconds(30),
                 RetryPolicy retry = {});

  nlohmann::json post(const std::string& path, const nlohmann::json& body) const;

  const std::string& base_url() const noexcept { return base_url_; }
  const std::string& service() const noexcept { return service_; }

 private:
  std::string service_;
  std::string base_url_;
  std::chrono::milliseconds timeout_;
  RetryPolicy retry_;
};

}  // namespace moraldial
