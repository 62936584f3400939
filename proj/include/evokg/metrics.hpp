#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace evokg::metrics {

// 1 iff any normalized answer is a substring of the normalized response.
int accuracy_contains(std::string_view response, const std::vector<std::string>& answers);

// 1 iff the normalized response equals any normalized answer.
int exact_match(std::string_view response, const std::vector<std::string>& answers);

// Token-level multiset F1 between two texts (after normalization).
// Both empty -> 1, exactly one empty -> 0.
double token_f1_pair(std::string_view a, std::string_view b);

// Best token F1 between the response and any answer.
double token_f1(std::string_view response, const std::vector<std::string>& answers);

struct QueryEval {
  std::string query_id;
  int acc = 0;
  int em = 0;
  double f1 = 0.0;
};

struct EvalResult {
  double acc = 0.0;
  double em = 0.0;
  double f1 = 0.0;
  std::vector<QueryEval> per_query;
};

}  // namespace evokg::metrics
