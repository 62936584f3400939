#pragma once

#include <map>
#include <string>
#include <vector>

#include "evokg/graph.hpp"
#include "evokg/retrieval.hpp"

namespace evokg {

inline constexpr double kExpectedUtilityFloor = 1e-6;

// Frozen forward state for one query: probabilities and priorities are
// captured at retrieval time and replayed during the backward pass, so
// later score updates never alter an in-flight batch.
struct QueryRecord {
  std::string query_id;
  double alpha = 0.5;
  std::vector<RankedPath> paths;
  std::vector<double> utilities;  // aligned with paths, each in [-1, 1]
};

// Recomputes p, log_avg and priority from the frozen s_r/s_c/alpha.
// Used when those inputs are perturbed (finite differences, replays).
void recompute_forward(QueryRecord& record);

// E = sum_i P(L_i) * (U_i + 1) / 2, clamped to [kExpectedUtilityFloor, 1].
double expected_utility(const QueryRecord& record);

// L = -log(E).
double loss(const QueryRecord& record);

enum class GradientMode {
  exact,          // true derivative of the implemented forward pass
  paper_literal,  // includes the product-of-probabilities factor
};

struct GradientReport {
  std::map<TripletId, double> d_score;
  double d_alpha = 0.0;
  double loss = 0.0;      // mean over accumulated queries
  double expected = 0.0;  // mean expected utility
  int queries = 0;
};

// Gradients of the loss for a single query. Throws on an empty path list.
GradientReport query_gradients(const QueryRecord& record,
                               GradientMode mode = GradientMode::exact);

// Sums per-triplet and alpha gradients across queries (fixed order by
// triplet id); loss/expected are averaged.
GradientReport accumulate_gradients(const std::vector<QueryRecord>& batch,
                                    GradientMode mode = GradientMode::exact);

// One clamped gradient-descent step: s <- clamp(s - eta * g, floor, 1),
// alpha <- clamp(alpha - eta * g_alpha, 0, 1). Throws on non-finite
// gradients without touching the graph.
void apply_updates(KnowledgeGraph& kg, const GradientReport& report, double eta);

}  // namespace evokg
