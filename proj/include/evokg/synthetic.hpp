#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "evokg/annotations.hpp"
#include "evokg/retrieval.hpp"

namespace evokg {

// Synthetic corpus layout: one subgraph per planted test chain. Each
// subgraph has a test chain tsrc→…→mid→ans, train queries whose target
// paths are alternative chains rooted at the hub entity mid (disjoint
// from the test path), planted noise at the hub (a distractor with high
// lexical overlap with the queries, or an outdated edge contradicting
// the supporting triplet), and filler edges that give the hub enough
// out-degree for suppressed noise to fall out of the top-M retrieval.
// Background entities carry edges disconnected from the subgraphs.
struct SynthParams {
  int chains = 100;          // planted supporting chains / test queries
  int train_per_chain = 2;   // train queries per subgraph
  int distractors = 50;
  int outdated = 50;
  int background_entities = 600;
  int branching = 1;         // background out-degree
  std::uint64_t seed = 0;
};

struct SyntheticCorpus {
  std::vector<Triplet> triplets;  // tid unset; head/relation/tail/origin used
  std::vector<Query> train_queries;
  std::vector<Query> test_queries;
  Annotations annotations;
};

// Deterministic in the seed. Throws std::invalid_argument on infeasible
// parameters.
SyntheticCorpus generate_synthetic(const SynthParams& params);

// Writes triplets.jsonl, train_queries.jsonl, test_queries.jsonl and
// annotations.json under out_dir.
void write_corpus(const SyntheticCorpus& corpus, const std::string& out_dir);

// No test reasoning path may appear as a train target path. Throws on
// violation.
void audit_path_disjointness(const SyntheticCorpus& corpus);

}  // namespace evokg
