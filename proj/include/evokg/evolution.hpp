#pragma once

#include <functional>
#include <string>
#include <vector>

#include "evokg/graph.hpp"

namespace evokg {

struct EvolutionConfig {
  int max_fusion_hop = 3;     // H: max triplets in a fused path
  int suppression_window = 3; // W: consecutive-low iterations before flagging
  bool hard_archive = false;
};

struct Thresholds {
  double low = 0.0;   // mu - sigma, floored at kScoreFloor
  double high = 0.0;  // mu + sigma
};

struct ShortcutProposal {
  std::string head;
  std::string tail;
  std::string label;
  double score = 0.0;  // mean of source-path scores
  std::vector<TripletId> source_path;
};

// Labeler maps the constituent relation labels to a shortcut label.
using ShortcutLabeler = std::function<std::string(const std::vector<std::string>&)>;

// Joins constituent relation labels with arrows.
std::string fallback_label(const std::vector<std::string>& relations);

Thresholds compute_thresholds(const KnowledgeGraph& kg);

// Chain-BFS from every seed triplet with s >= tau_high: a proposal is
// emitted for each simple chain of 2..H triplets whose mean score stays
// >= tau_high and whose endpoints are not already connected. Neighbors
// are visited in descending score order with early termination once the
// path mean drops below the threshold. Proposals are unlabeled.
std::vector<ShortcutProposal> propose_shortcuts(const KnowledgeGraph& kg,
                                                const Thresholds& thresholds,
                                                const EvolutionConfig& config);

struct EvolutionSummary {
  Thresholds thresholds;
  int proposal_count = 0;
  std::vector<TripletId> inserted;
  std::vector<TripletId> flagged;
};

// Labels and deduplicates proposals by (head, tail) keeping the highest
// score (ties: lexicographically smallest label), inserts them as
// shortcut triplets and increments the iteration counter.
std::vector<TripletId> apply_evolution(KnowledgeGraph& kg,
                                       std::vector<ShortcutProposal> proposals,
                                       const ShortcutLabeler& labeler);

// Updates consecutive-low counters against tau_low and returns the ids
// whose count reached the suppression window. With hard_archive on,
// flagged triplets are excluded from retrieval until their score
// recovers to tau_low or above.
std::vector<TripletId> track_suppression(KnowledgeGraph& kg, double tau_low,
                                         const EvolutionConfig& config);

// One full evolution step: thresholds, fusion, suppression.
EvolutionSummary evolve(KnowledgeGraph& kg, const EvolutionConfig& config,
                        const ShortcutLabeler& labeler);

}  // namespace evokg
