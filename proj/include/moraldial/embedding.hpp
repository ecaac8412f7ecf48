#pragma once

#include <span>
#include <string>
#include <vector>

#include "moraldial/http_json.hpp"

namespace moraldial {

using Embedding = std::vector<float>;

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<Embedding> embed(std::span<const std::string> texts) = 0;

  Embedding embed_one(const std::string& text);
};

/// Client for POST /embed {"texts": [...]} -> {"vectors": [[...], ...]}.
class EmbeddingClient final : public Embedder {
 public:
  EmbeddingClient(std::string endpoint, std::chrono::milliseconds timeout = std::chrono::seconds(30), RetryPolicy retry = {});
  std::vector<Embedding> embed(std::span<const std::string> texts) override;

 private:
  HttpJsonClient http_;
};

/// Offline bag-of-words embedder: lower-cased word tokens minus a short stop
/// list, signed feature hashing into `dimension` buckets. Deterministic and
/// dependency-free; good enough for lexical retrieval in tests and dry runs.
class HashingEmbedder final : public Embedder {
 public:
  explicit HashingEmbedder(std::size_t dimension = 256);
  std::vector<Embedding> embed(std::span<const std::string> texts) override;
  std::size_t dimension() const { return dimension_; }

 private:
  std::size_t dimension_;
};

/// L2 norm accumulated in double.
double l2_norm(std::span<const float> v);
/// Unit-length copy; InputError on a zero or non-finite vector.
Embedding normalize(std::span<const float> v);
/// Dot product accumulated in double, index order.
double dot(std::span<const float> a, std::span<const float> b);

}  // namespace moraldial
