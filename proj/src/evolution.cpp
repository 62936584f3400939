#include "evokg/evolution.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace evokg {

std::string fallback_label(const std::vector<std::string>& relations) {
  std::string label;
  for (std::size_t i = 0; i < relations.size(); ++i) {
    if (i > 0) label += "→";
    label += relations[i];
  }
  return label;
}

Thresholds compute_thresholds(const KnowledgeGraph& kg) {
  const ScoreStats stats = kg.contribution_stats();
  Thresholds t;
  t.high = stats.mean + stats.stddev;
  t.low = std::max(stats.mean - stats.stddev, kScoreFloor);
  return t;
}

namespace {

struct ChainNode {
  TripletId last;
  std::vector<TripletId> path;
  double score_sum;
  std::set<std::string> entities;
};

}  // namespace

std::vector<ShortcutProposal> propose_shortcuts(const KnowledgeGraph& kg,
                                                const Thresholds& thresholds,
                                                const EvolutionConfig& config) {
  std::vector<ShortcutProposal> proposals;
  for (const Triplet& seed : kg.triplets()) {
    if (kg.score(seed.tid) < thresholds.high) continue;

    std::vector<ChainNode> frontier;
    frontier.push_back(
        {seed.tid, {seed.tid}, kg.score(seed.tid), {seed.head, seed.tail}});

    for (int hop = 2; hop <= config.max_fusion_hop && !frontier.empty(); ++hop) {
      std::vector<ChainNode> next;
      for (const ChainNode& node : frontier) {
        // Descending-score order; once the path mean falls below the
        // threshold every remaining neighbor fails too.
        for (TripletId nbr : kg.chain_successors(node.last)) {
          const Triplet& nt = kg.triplet(nbr);
          if (node.entities.count(nt.tail)) continue;  // simple paths only
          const double mean = (node.score_sum + kg.score(nbr)) / static_cast<double>(hop);
          if (mean < thresholds.high) break;

          ChainNode ext;
          ext.last = nbr;
          ext.path = node.path;
          ext.path.push_back(nbr);
          ext.score_sum = node.score_sum + kg.score(nbr);
          ext.entities = node.entities;
          ext.entities.insert(nt.tail);

          if (!kg.has_edge(seed.head, nt.tail)) {
            ShortcutProposal p;
            p.head = seed.head;
            p.tail = nt.tail;
            p.score = mean;
            p.source_path = ext.path;
            proposals.push_back(std::move(p));
          }
          next.push_back(std::move(ext));
        }
      }
      frontier = std::move(next);
    }
  }
  return proposals;
}

std::vector<TripletId> apply_evolution(KnowledgeGraph& kg,
                                       std::vector<ShortcutProposal> proposals,
                                       const ShortcutLabeler& labeler) {
  for (auto& p : proposals) {
    std::vector<std::string> relations;
    relations.reserve(p.source_path.size());
    for (TripletId tid : p.source_path) relations.push_back(kg.triplet(tid).relation);
    p.label = labeler(relations);
  }

  // Highest score wins per endpoint pair; ties take the smallest label.
  std::map<std::pair<std::string, std::string>, const ShortcutProposal*> winners;
  for (const auto& p : proposals) {
    auto key = std::make_pair(p.head, p.tail);
    auto it = winners.find(key);
    if (it == winners.end() || p.score > it->second->score ||
        (p.score == it->second->score && p.label < it->second->label)) {
      winners[key] = &p;
    }
  }

  kg.set_iteration(kg.iteration() + 1);
  std::vector<TripletId> inserted;
  for (const auto& [key, p] : winners) {
    inserted.push_back(kg.add_triplet(p->head, p->label, p->tail, Origin::shortcut, p->score));
  }
  return inserted;
}

std::vector<TripletId> track_suppression(KnowledgeGraph& kg, double tau_low,
                                         const EvolutionConfig& config) {
  std::vector<TripletId> flagged;
  for (const Triplet& t : kg.triplets()) {
    const ScoreState& st = kg.score_state(t.tid);
    if (st.s < tau_low) {
      kg.set_consecutive_low(t.tid, st.consecutive_low + 1);
      if (kg.score_state(t.tid).consecutive_low >= config.suppression_window) {
        flagged.push_back(t.tid);
        if (config.hard_archive) kg.set_archived(t.tid, true);
      }
    } else {
      kg.set_consecutive_low(t.tid, 0);
      if (st.archived) kg.set_archived(t.tid, false);  // proved useful again
    }
  }
  return flagged;
}

EvolutionSummary evolve(KnowledgeGraph& kg, const EvolutionConfig& config,
                        const ShortcutLabeler& labeler) {
  EvolutionSummary summary;
  summary.thresholds = compute_thresholds(kg);
  auto proposals = propose_shortcuts(kg, summary.thresholds, config);
  summary.proposal_count = static_cast<int>(proposals.size());
  summary.inserted = apply_evolution(kg, std::move(proposals), labeler);
  summary.flagged = track_suppression(kg, summary.thresholds.low, config);
  return summary;
}

}  // namespace evokg
