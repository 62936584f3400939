#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "evokg/embedding.hpp"
#include "evokg/graph.hpp"

using namespace evokg;

TEST_CASE("cosine on hand-built vectors") {
  CHECK(cosine({1.0, 0.0}, {0.0, 1.0}) == doctest::Approx(0.0));
  CHECK(cosine({1.0, 0.0}, {1.0, 0.0}) == doctest::Approx(1.0));
  CHECK(cosine({1.0, 0.0}, {-1.0, 0.0}) == doctest::Approx(-1.0));
  CHECK(cosine({0.0, 0.0}, {1.0, 0.0}) == doctest::Approx(0.0));
  CHECK(cosine({3.0, 4.0}, {4.0, 3.0}) == doctest::Approx(24.0 / 25.0));
}

TEST_CASE("similarity_from_cosine maps [-1,1] to [floor,1]") {
  CHECK(similarity_from_cosine(1.0) == doctest::Approx(1.0));
  CHECK(similarity_from_cosine(0.0) == doctest::Approx(0.5));
  CHECK(similarity_from_cosine(-1.0) == doctest::Approx(kRelevanceFloor));
  CHECK(similarity_from_cosine(2.0) == doctest::Approx(1.0));
  CHECK(similarity_from_cosine(-2.0) == doctest::Approx(kRelevanceFloor));
}

TEST_CASE("embedder is deterministic and case/order insensitive") {
  LocalHashEmbedder emb;
  const auto a = emb.embed("Alice works at Google");
  CHECK(a == emb.embed("Alice works at Google"));
  CHECK(a == emb.embed("alice WORKS at google"));
  CHECK(a == emb.embed("google at works alice"));
  CHECK(a.size() == emb.dimension());
}

TEST_CASE("embeddings are L2-normalized") {
  LocalHashEmbedder emb;
  for (const char* text : {"one", "alpha beta gamma", "a a a b"}) {
    const auto v = emb.embed(text);
    double norm = 0.0;
    for (double x : v) norm += x * x;
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("empty text is rejected") {
  LocalHashEmbedder emb;
  CHECK_THROWS_AS(emb.embed(""), EmbeddingError);
  CHECK_THROWS_AS(emb.embed("  ...  "), EmbeddingError);
}

TEST_CASE("token-disjoint texts with disjoint buckets are orthogonal") {
  LocalHashEmbedder emb;
  const std::vector<std::string> left = {"alice", "google"};
  const std::vector<std::string> right = {"banana", "quartz"};
  for (const auto& l : left)
    for (const auto& r : right) REQUIRE(emb.bucket(l) != emb.bucket(r));
  CHECK(cosine(emb.embed("alice google"), emb.embed("banana quartz")) == doctest::Approx(0.0));
}

TEST_CASE("relevance scorer renders and scores triplet texts") {
  KnowledgeGraph kg;
  const TripletId match = kg.add_triplet("alice", "works at", "google");
  const TripletId disjoint = kg.add_triplet("banana", "grown in", "quartz");
  CHECK(RelevanceScorer::render(kg.triplet(match)) == "alice works at google");

  LocalHashEmbedder emb;
  RelevanceScorer scorer(emb);
  const auto q = scorer.embed_query("alice works at google");
  CHECK(scorer.relevance(q, kg, match) == doctest::Approx(1.0));
  for (const char* tok : {"alice", "works", "at", "google"})
    for (const char* other : {"banana", "grown", "in", "quartz"})
      REQUIRE(emb.bucket(tok) != emb.bucket(other));
  CHECK(scorer.relevance(q, kg, disjoint) == doctest::Approx(0.5));
}

TEST_CASE("relevance is clamped to [floor, 1]") {
  KnowledgeGraph kg;
  const TripletId t = kg.add_triplet("alpha", "rel", "beta");
  LocalHashEmbedder emb;
  RelevanceScorer scorer(emb);
  for (const char* qt : {"alpha rel beta", "unrelated words here", "alpha", "beta rel"}) {
    const double r = scorer.relevance(scorer.embed_query(qt), kg, t);
    CHECK(r >= kRelevanceFloor);
    CHECK(r <= 1.0);
  }
}

TEST_CASE("entity embeddings are cached and stable") {
  LocalHashEmbedder emb;
  RelevanceScorer scorer(emb);
  const EmbeddingVector& a = scorer.embed_entity("google");
  const EmbeddingVector& b = scorer.embed_entity("google");
  CHECK(&a == &b);
  CHECK(a == emb.embed("google"));
  scorer.invalidate();
  CHECK(scorer.embed_entity("google") == a);
}
