#pragma once

#include <map>
#include <string>
#include <vector>

#include "evokg/graph.hpp"

namespace evokg {

enum class TripletRole { support, distractor, outdated };

std::string_view role_name(TripletRole r);
TripletRole role_from_name(std::string_view name);

// Planted-truth annotations for a synthetic corpus: the role of each
// planted triplet and, per query, the supporting chain it was generated
// from. Consumed by the scripted judge and the problematic-ratio metric.
struct Annotations {
  // key: "head\x1frelation\x1ftail"
  std::map<std::string, TripletRole> roles;
  // query id -> ordered triplet keys of the planted supporting chain
  std::map<std::string, std::vector<std::string>> support_chains;

  static std::string key(const std::string& head, const std::string& relation,
                         const std::string& tail);
  static std::string key(const Triplet& t);

  bool is_problematic(const Triplet& t) const;
  bool is_support(const Triplet& t) const;

  void save(const std::string& path) const;
  static Annotations load(const std::string& path);
};

}  // namespace evokg
