#include "moraldial/embedding.hpp"

#include <cctype>
#include <cmath>
#include <set>

#include "moraldial/error.hpp"
#include "moraldial/text.hpp"

namespace moraldial {

using nlohmann::json;

Embedding Embedder::embed_one(const std::string& text) {
  auto out = embed(std::span<const std::string>(&text, 1));
  if (out.size() != 1) throw ProtocolError("embedder returned " + std::to_string(out.size()) + " vectors for 1 text");
  return std::move(out.front());
}

EmbeddingClient::EmbeddingClient(std::string endpoint, std::chrono::milliseconds timeout, RetryPolicy retry)
    : http_("embedder", std::move(endpoint), timeout, retry) {}

std::vector<Embedding> EmbeddingClient::embed(std::span<const std::string> texts) {
  json body = {{"texts", json::array()}};
  for (const auto& t : texts) body["texts"].push_back(t);
  const json response = http_.post("/embed", body);
  if (!response.is_object() || !response.contains("vectors") || !response["vectors"].is_array()) {
    throw ProtocolError("embedder response lacks 'vectors'");
  }
  const auto& vectors = response["vectors"];
  if (vectors.size() != texts.size()) {
    throw ProtocolError("embedder returned " + std::to_string(vectors.size()) + " vectors for " +
                        std::to_string(texts.size()) + " texts");
  }
  std::vector<Embedding> out;
  out.reserve(vectors.size());
  for (const auto& v : vectors) {
    if (!v.is_array()) throw ProtocolError("embedder vector is not an array");
    Embedding e;
    e.reserve(v.size());
    for (const auto& x : v) {
      if (!x.is_number()) throw ProtocolError("embedder vector has a non-numeric component");
      e.push_back(x.get<float>());
    }
    out.push_back(std::move(e));
  }
  return out;
}

HashingEmbedder::HashingEmbedder(std::size_t dimension) : dimension_(dimension) {
  if (dimension_ == 0) throw ConfigError("hashing embedder dimension must be positive");
}

std::vector<Embedding> HashingEmbedder::embed(std::span<const std::string> texts) {
  static const std::set<std::string> kStop = {"a",   "an",  "the", "to",  "of",   "and", "or",  "is",
                                              "are", "be",  "it",  "in",  "on",   "for", "that", "this",
                                              "i",   "you", "do",  "was", "with", "as",  "at",  "my"};
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    Embedding v(dimension_, 0.0f);
    std::string token;
    auto flush = [&] {
      if (!token.empty() && kStop.count(token) == 0) {
        const auto h = text::fnv1a64(token);
        const float sign = (h >> 63) != 0 ? -1.0f : 1.0f;
        v[h % dimension_] += sign;
      }
      token.clear();
    };
    for (char c : t) {
      const auto uc = static_cast<unsigned char>(c);
      if (std::isalnum(uc) || c == '\'') {
        token.push_back(static_cast<char>(std::tolower(uc)));
      } else {
        flush();
      }
    }
    flush();
    // texts made only of stop words still need a direction
    if (l2_norm(v) == 0.0) v[text::fnv1a64(text::to_lower(t)) % dimension_] = 1.0f;
    out.push_back(std::move(v));
  }
  return out;
}

double l2_norm(std::span<const float> v) {
  double sum = 0.0;
  for (float x : v) sum += static_cast<double>(x) * static_cast<double>(x);
  return std::sqrt(sum);
}

Embedding normalize(std::span<const float> v) {
  const double norm = l2_norm(v);
  if (!std::isfinite(norm) || norm == 0.0) throw InputError("cannot normalize a zero or non-finite vector");
  Embedding out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(static_cast<double>(v[i]) / norm);
  return out;
}

double dot(std::span<const float> a, std::span<const float> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return sum;
}

}  // namespace moraldial
