#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace evokg {

using TripletId = std::uint32_t;

inline constexpr double kScoreFloor = 1e-4;
inline constexpr double kInitialScore = 0.5;

// Presentation-only raw score; the stored parameter is the normalized s.
inline double raw_score(double s) { return 200.0 * s; }

enum class Origin { base, shortcut };

std::string_view origin_name(Origin o);
Origin origin_from_name(std::string_view name);

struct Triplet {
  TripletId tid = 0;
  std::string head;
  std::string relation;
  std::string tail;
  Origin origin = Origin::base;
  int created_iteration = 0;
};

struct ScoreState {
  double s = kInitialScore;
  int consecutive_low = 0;
  bool archived = false;
};

struct ScoreStats {
  double mean = 0.0;
  double stddev = 0.0;  // population
};

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Directed triplet store with per-edge learnable contribution scores.
// Entities are identified by their surface name.
class KnowledgeGraph {
 public:
  // Inserts a triplet, auto-registering its entities. Duplicate
  // (head, relation, tail) is a no-op returning the existing id.
  // Shortcuts carry the fusion-computed score instead of the default.
  TripletId add_triplet(const std::string& head, const std::string& relation,
                        const std::string& tail, Origin origin = Origin::base,
                        std::optional<double> score = std::nullopt);

  const Triplet& triplet(TripletId tid) const;
  const ScoreState& score_state(TripletId tid) const;
  double score(TripletId tid) const { return score_state(tid).s; }

  // Clamps into [kScoreFloor, 1]. Throws on non-finite input.
  void set_score(TripletId tid, double s);

  void set_consecutive_low(TripletId tid, int n);
  void set_archived(TripletId tid, bool archived);

  // Triplets whose head equals this triplet's tail, sorted by score
  // descending, ties by (relation, tail) ascending.
  std::vector<TripletId> chain_successors(TripletId tid) const;

  // Same ordering, keyed by entity.
  std::vector<TripletId> successors_of(const std::string& entity) const;
  const std::vector<TripletId>& out_edges(const std::string& entity) const;
  const std::vector<TripletId>& in_edges(const std::string& entity) const;

  // Mean and population std of normalized scores. Throws on empty graph.
  ScoreStats contribution_stats() const;

  // Any edge head -> tail, irrespective of relation label.
  bool has_edge(const std::string& head, const std::string& tail) const;
  std::optional<TripletId> find(const std::string& head, const std::string& relation,
                                const std::string& tail) const;
  bool has_entity(const std::string& name) const { return entities_.count(name) != 0; }

  std::size_t size() const { return triplets_.size(); }
  const std::vector<Triplet>& triplets() const { return triplets_; }
  const std::set<std::string>& entities() const { return entities_; }

  int iteration() const { return iteration_; }
  void set_iteration(int h) { iteration_ = h; }
  double alpha() const { return alpha_; }
  void set_alpha(double a);

  // Rebuilds both adjacency indices from the triplet set and compares.
  // Throws GraphError on any mismatch.
  void audit_indices() const;

  void save_snapshot(const std::string& path) const;
  static KnowledgeGraph load_snapshot(const std::string& path);

  bool observably_equal(const KnowledgeGraph& other) const;

 private:
  std::vector<Triplet> triplets_;
  std::vector<ScoreState> scores_;
  std::set<std::string> entities_;
  std::map<std::string, std::vector<TripletId>> out_index_;
  std::map<std::string, std::vector<TripletId>> in_index_;
  std::map<std::string, TripletId> by_key_;
  double alpha_ = 0.5;
  int iteration_ = 0;

  std::vector<TripletId> sorted_by_priority(std::vector<TripletId> ids) const;
};

}  // namespace evokg
