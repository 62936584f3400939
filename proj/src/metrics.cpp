#include "evokg/metrics.hpp"

#include <algorithm>
#include <map>

#include "evokg/text.hpp"

namespace evokg::metrics {

int accuracy_contains(std::string_view response, const std::vector<std::string>& answers) {
  const std::string r = text::normalize(response);
  for (const auto& a : answers) {
    const std::string na = text::normalize(a);
    if (na.empty()) continue;
    if (r.find(na) != std::string::npos) return 1;
  }
  return 0;
}

int exact_match(std::string_view response, const std::vector<std::string>& answers) {
  const std::string r = text::normalize(response);
  for (const auto& a : answers) {
    if (r == text::normalize(a)) return 1;
  }
  return 0;
}

double token_f1_pair(std::string_view a, std::string_view b) {
  const auto ta = text::tokenize(a);
  const auto tb = text::tokenize(b);
  if (ta.empty() && tb.empty()) return 1.0;
  if (ta.empty() || tb.empty()) return 0.0;
  std::map<std::string, int> counts;
  for (const auto& t : ta) ++counts[t];
  int overlap = 0;
  for (const auto& t : tb) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  if (overlap == 0) return 0.0;
  const double precision = static_cast<double>(overlap) / static_cast<double>(tb.size());
  const double recall = static_cast<double>(overlap) / static_cast<double>(ta.size());
  return 2.0 * precision * recall / (precision + recall);
}

double token_f1(std::string_view response, const std::vector<std::string>& answers) {
  double best = 0.0;
  for (const auto& a : answers) best = std::max(best, token_f1_pair(a, response));
  return best;
}

}  // namespace evokg::metrics
