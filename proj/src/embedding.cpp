#include "evokg/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "evokg/text.hpp"

namespace evokg {

namespace {

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.size() != b.size()) throw EmbeddingError("dimension mismatch in cosine");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

double similarity_from_cosine(double c) {
  return std::clamp((c + 1.0) / 2.0, kRelevanceFloor, 1.0);
}

LocalHashEmbedder::LocalHashEmbedder(std::size_t dimension) : dim_(dimension) {
  if (dim_ == 0) throw std::invalid_argument("embedding dimension must be positive");
}

std::size_t LocalHashEmbedder::bucket(const std::string& token) const {
  return static_cast<std::size_t>(fnv1a64(token) % dim_);
}

EmbeddingVector LocalHashEmbedder::embed(const std::string& text) {
  if (text.empty()) throw EmbeddingError("cannot embed empty text");
  EmbeddingVector v(dim_, 0.0);
  for (const auto& tok : text::tokenize(text)) v[bucket(tok)] += 1.0;
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm == 0.0) throw EmbeddingError("text has no tokens: " + text);
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

RemoteEmbedder::RemoteEmbedder(std::string endpoint, std::size_t dimension, int max_retries)
    : endpoint_(std::move(endpoint)), dim_(dimension), max_retries_(max_retries) {}

std::unique_ptr<RemoteEmbedder> RemoteEmbedder::from_env(std::size_t dimension) {
  const char* ep = std::getenv("EMBED_ENDPOINT");
  if (ep == nullptr || *ep == '\0')
    throw EmbeddingError("EMBED_ENDPOINT is not set; remote embedding unavailable");
  return std::make_unique<RemoteEmbedder>(ep, dimension);
}

EmbeddingVector RemoteEmbedder::embed(const std::string& text) {
  if (text.empty()) throw EmbeddingError("cannot embed empty text");
  nlohmann::json body;
  body["texts"] = std::vector<std::string>{text};

  std::string last_error;
  for (int attempt = 0; attempt <= max_retries_; ++attempt) {
    httplib::Client client(endpoint_);
    client.set_connection_timeout(10);
    client.set_read_timeout(30);
    auto res = client.Post("/embed", body.dump(), "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "http status " + std::to_string(res->status);
      continue;
    }
    try {
      auto j = nlohmann::json::parse(res->body);
      auto vectors = j.at("vectors").get<std::vector<EmbeddingVector>>();
      if (vectors.size() != 1 || vectors[0].size() != dim_)
        throw EmbeddingError("embedding service returned wrong shape");
      double norm = 0.0;
      for (double x : vectors[0]) norm += x * x;
      norm = std::sqrt(norm);
      if (norm == 0.0) throw EmbeddingError("embedding service returned zero vector");
      for (double& x : vectors[0]) x /= norm;
      return vectors[0];
    } catch (const nlohmann::json::exception& e) {
      last_error = std::string("bad response body: ") + e.what();
    }
  }
  throw EmbeddingError("remote embedding failed after " + std::to_string(max_retries_ + 1) +
                       " attempts: " + last_error);
}

std::string RelevanceScorer::render(const Triplet& t) {
  return t.head + " " + t.relation + " " + t.tail;
}

const EmbeddingVector& RelevanceScorer::embed_entity(const std::string& name) {
  auto it = entity_cache_.find(name);
  if (it == entity_cache_.end()) it = entity_cache_.emplace(name, provider_.embed(name)).first;
  return it->second;
}

double RelevanceScorer::relevance(const EmbeddingVector& query, const KnowledgeGraph& kg,
                                  TripletId tid) {
  auto it = cache_.find(tid);
  if (it == cache_.end()) {
    it = cache_.emplace(tid, provider_.embed(render(kg.triplet(tid)))).first;
  }
  return similarity_from_cosine(cosine(query, it->second));
}

}  // namespace evokg
