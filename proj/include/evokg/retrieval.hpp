#pragma once

#include <set>
#include <string>
#include <vector>

#include "evokg/embedding.hpp"
#include "evokg/graph.hpp"

namespace evokg {

struct Query {
  std::string id;
  std::string text;
  std::vector<std::string> answers;
  // Optional pre-scored human feedback (1..5); 0 means absent.
  int feedback = 0;
};

struct ReasoningPath {
  std::string start;
  std::vector<TripletId> triplets;
};

// Per-triplet forward state frozen at retrieval time.
struct PathTerm {
  TripletId tid = 0;
  double s_r = 0.0;
  double s_c = 0.0;
  double p = 0.0;  // (1 - alpha) * s_r + alpha * s_c
};

struct RankedPath {
  ReasoningPath path;
  std::vector<PathTerm> terms;
  double log_avg = 0.0;   // mean of log p over the path
  double priority = 0.0;  // softmax over the candidate set
};

struct RetrievalConfig {
  int top_entities = 10;   // N
  int top_paths = 10;      // M per start entity
  int hops = 2;            // k, also the path enumeration bound
  bool skip_archived = false;
};

// P(t) = (1 - alpha) * S_r + alpha * S_c.
double triplet_probability(double s_r, double s_c, double alpha);

// Softmax over per-path log-average probabilities; fills log_avg and
// priority in place. Throws on an empty set.
void assign_priorities(std::vector<RankedPath>& candidates);

class Retriever {
 public:
  Retriever(const KnowledgeGraph& kg, RelevanceScorer& scorer) : kg_(kg), scorer_(scorer) {}

  // Top-N entities by query/name similarity, ties by name ascending.
  std::vector<std::string> recognize_entities(const Query& q, int n) const;

  // Directed k-hop reachable triplet set from the seeds.
  std::set<TripletId> extract_subgraph(const std::vector<std::string>& seeds, int k) const;

  // All simple directed paths of length 1..max_hop from start, depth-first
  // in chain-successor order, restricted to the subgraph.
  std::vector<ReasoningPath> enumerate_paths(const std::set<TripletId>& subgraph,
                                             const std::string& start, int max_hop) const;

  // Full forward pass: one shared softmax over all candidates of the
  // query, then top-M per start entity.
  std::vector<RankedPath> retrieve(const Query& q, const RetrievalConfig& config) const;

  const KnowledgeGraph& graph() const { return kg_; }

 private:
  const KnowledgeGraph& kg_;
  RelevanceScorer& scorer_;
};

// One path per line, priority descending: "e0 -[r1]-> e1 -[r2]-> e2".
std::string format_context(const KnowledgeGraph& kg, const std::vector<RankedPath>& paths);

}  // namespace evokg
