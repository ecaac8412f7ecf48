#include "moraldial/http_json.hpp"

#include <thread>

#include <httplib.h>

#include "moraldial/error.hpp"

namespace moraldial {

HttpJsonClient::HttpJsonClient(std::string service, std::string base_url, std::chrono::milliseconds timeout,
                               RetryPolicy retry)
    : service_(std::move(service)), base_url_(std::move(base_url)), timeout_(timeout), retry_(retry) {
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
  if (base_url_.rfind("http://", 0) != 0 && base_url_.rfind("https://", 0) != 0) {
    throw ConfigError(service_ + " endpoint must be an http(s) URL: '" + base_url_ + "'");
  }
  if (retry_.max_attempts < 1) retry_.max_attempts = 1;
}

nlohmann::json HttpJsonClient::post(const std::string& path, const nlohmann::json& body) const {
  const std::string payload = body.dump();
  std::string last_error;
  for (int attempt = 1; attempt <= retry_.max_attempts; ++attempt) {
    httplib::Client client(base_url_);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);
    auto res = client.Post(path, payload, "application/json");
    if (!res) {
      last_error = "POST " + base_url_ + path + ": " + httplib::to_string(res.error());
    } else if (res->status >= 500) {
      last_error = "POST " + base_url_ + path + ": HTTP " + std::to_string(res->status);
    } else if (res->status >= 400) {
      throw ProtocolError(service_ + ": POST " + path + " rejected with HTTP " + std::to_string(res->status) + ": " +
                          res->body);
    } else {
      try {
        return nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::parse_error&) {
        throw ProtocolError(service_ + ": POST " + path + " returned a non-JSON body");
      }
    }
    if (attempt < retry_.max_attempts) std::this_thread::sleep_for(retry_.backoff * attempt);
  }
  throw ServiceUnavailable(service_, last_error);
}

}  // namespace moraldial
