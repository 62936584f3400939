#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "evokg/graph.hpp"

namespace evokg {

inline constexpr double kRelevanceFloor = 1e-4;

using EmbeddingVector = std::vector<double>;

double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

class EmbeddingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  // Returns an L2-normalized vector. Throws EmbeddingError on empty text
  // or transport failure.
  virtual EmbeddingVector embed(const std::string& text) = 0;
  virtual std::size_t dimension() const = 0;
};

// Deterministic hashed bag-of-tokens embedder: lowercase, split on
// non-alphanumerics, hash each token to a bucket, accumulate counts,
// L2-normalize.
class LocalHashEmbedder final : public EmbeddingProvider {
 public:
  explicit LocalHashEmbedder(std::size_t dimension = 4096);
  EmbeddingVector embed(const std::string& text) override;
  std::size_t dimension() const override { return dim_; }

  // Bucket index for a single token; exposed for collision checks.
  std::size_t bucket(const std::string& token) const;

 private:
  std::size_t dim_;
};

// Delegates to an embedding service configured via EMBED_ENDPOINT.
class RemoteEmbedder final : public EmbeddingProvider {
 public:
  RemoteEmbedder(std::string endpoint, std::size_t dimension, int max_retries = 2);
  static std::unique_ptr<RemoteEmbedder> from_env(std::size_t dimension = 1024);
  EmbeddingVector embed(const std::string& text) override;
  std::size_t dimension() const override { return dim_; }

 private:
  std::string endpoint_;
  std::size_t dim_;
  int max_retries_;
};

// Caches triplet-text embeddings by triplet id; query embeddings are not
// cached. Inserting triplets past the cached range is handled lazily.
class RelevanceScorer {
 public:
  explicit RelevanceScorer(EmbeddingProvider& provider) : provider_(provider) {}

  // Triplet rendered as "head relation tail".
  static std::string render(const Triplet& t);

  EmbeddingVector embed_query(const std::string& text) { return provider_.embed(text); }

  // Cached embedding of an entity surface name.
  const EmbeddingVector& embed_entity(const std::string& name);

  // clamp((cosine + 1) / 2, kRelevanceFloor, 1).
  double relevance(const EmbeddingVector& query, const KnowledgeGraph& kg, TripletId tid);

  // Drops cached entries (fusion adds new triplets; ids stay stable, so
  // this only matters when a graph is rebuilt in place).
  void invalidate() {
    cache_.clear();
    entity_cache_.clear();
  }

 private:
  EmbeddingProvider& provider_;
  std::map<TripletId, EmbeddingVector> cache_;
  std::map<std::string, EmbeddingVector> entity_cache_;
};

double similarity_from_cosine(double c);

}  // namespace evokg
