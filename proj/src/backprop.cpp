#include "evokg/backprop.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace evokg {

namespace {

void check_record(const QueryRecord& record) {
  if (record.paths.empty())
    throw std::invalid_argument("query record has no paths (query " + record.query_id + ")");
  if (record.paths.size() != record.utilities.size())
    throw std::invalid_argument("utilities misaligned with paths (query " + record.query_id + ")");
}

double raw_expected(const QueryRecord& record) {
  double e = 0.0;
  for (std::size_t i = 0; i < record.paths.size(); ++i)
    e += record.paths[i].priority * (record.utilities[i] + 1.0) / 2.0;
  return e;
}

}  // namespace

void recompute_forward(QueryRecord& record) {
  check_record(record);
  for (auto& rp : record.paths) {
    for (auto& term : rp.terms) term.p = triplet_probability(term.s_r, term.s_c, record.alpha);
  }
  assign_priorities(record.paths);
}

double expected_utility(const QueryRecord& record) {
  check_record(record);
  return std::clamp(raw_expected(record), kExpectedUtilityFloor, 1.0);
}

double loss(const QueryRecord& record) { return -std::log(expected_utility(record)); }

GradientReport query_gradients(const QueryRecord& record, GradientMode mode) {
  check_record(record);
  GradientReport report;
  report.queries = 1;

  const double e_raw = raw_expected(record);
  const double e = std::clamp(e_raw, kExpectedUtilityFloor, 1.0);
  report.expected = e;
  report.loss = -std::log(e);

  // Inside the clamp the loss is locally constant; gradients vanish.
  if (e_raw < kExpectedUtilityFloor) return report;

  double mean_utility = 0.0;
  for (std::size_t i = 0; i < record.paths.size(); ++i)
    mean_utility += record.paths[i].priority * record.utilities[i];

  for (std::size_t i = 0; i < record.paths.size(); ++i) {
    const RankedPath& rp = record.paths[i];
    const double v = rp.priority / static_cast<double>(rp.terms.size()) *
                     (record.utilities[i] - mean_utility);
    double literal_factor = 1.0;
    if (mode == GradientMode::paper_literal) {
      for (const auto& term : rp.terms) literal_factor *= term.p;
    }
    for (const auto& term : rp.terms) {
      const double shared = literal_factor * v / term.p / (2.0 * e);
      report.d_score[term.tid] += -record.alpha * shared;
      report.d_alpha += (term.s_r - term.s_c) * shared;
    }
  }
  return report;
}

GradientReport accumulate_gradients(const std::vector<QueryRecord>& batch, GradientMode mode) {
  GradientReport total;
  for (const auto& record : batch) {
    GradientReport r = query_gradients(record, mode);
    for (const auto& [tid, g] : r.d_score) total.d_score[tid] += g;
    total.d_alpha += r.d_alpha;
    total.loss += r.loss;
    total.expected += r.expected;
    ++total.queries;
  }
  if (total.queries > 0) {
    total.loss /= total.queries;
    total.expected /= total.queries;
  }
  return total;
}

void apply_updates(KnowledgeGraph& kg, const GradientReport& report, double eta) {
  if (eta <= 0.0) throw std::invalid_argument("learning rate must be positive");
  if (!std::isfinite(report.d_alpha))
    throw GraphError("non-finite alpha gradient; update aborted");
  for (const auto& [tid, g] : report.d_score) {
    if (!std::isfinite(g))
      throw GraphError("non-finite gradient for triplet " + std::to_string(tid) +
                       "; update aborted");
  }
  for (const auto& [tid, g] : report.d_score) kg.set_score(tid, kg.score(tid) - eta * g);
  kg.set_alpha(kg.alpha() - eta * report.d_alpha);
}

}  // namespace evokg
