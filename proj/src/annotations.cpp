#include "evokg/annotations.hpp"

#include <fstream>

#include <json.hpp>

namespace evokg {

std::string_view role_name(TripletRole r) {
  switch (r) {
    case TripletRole::support: return "support";
    case TripletRole::distractor: return "distractor";
    case TripletRole::outdated: return "outdated";
  }
  return "support";
}

TripletRole role_from_name(std::string_view name) {
  if (name == "support") return TripletRole::support;
  if (name == "distractor") return TripletRole::distractor;
  if (name == "outdated") return TripletRole::outdated;
  throw std::invalid_argument("unknown triplet role: " + std::string(name));
}

std::string Annotations::key(const std::string& head, const std::string& relation,
                             const std::string& tail) {
  return head + '\x1f' + relation + '\x1f' + tail;
}

std::string Annotations::key(const Triplet& t) { return key(t.head, t.relation, t.tail); }

bool Annotations::is_problematic(const Triplet& t) const {
  auto it = roles.find(key(t));
  return it != roles.end() && it->second != TripletRole::support;
}

bool Annotations::is_support(const Triplet& t) const {
  auto it = roles.find(key(t));
  return it != roles.end() && it->second == TripletRole::support;
}

void Annotations::save(const std::string& path) const {
  nlohmann::json j;
  nlohmann::json roles_json = nlohmann::json::object();
  for (const auto& [k, r] : roles) roles_json[k] = role_name(r);
  j["roles"] = std::move(roles_json);
  nlohmann::json chains_json = nlohmann::json::object();
  for (const auto& [qid, chain] : support_chains) chains_json[qid] = chain;
  j["support_chains"] = std::move(chains_json);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write annotations to " + path);
  out << j.dump() << '\n';
}

Annotations Annotations::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open annotations: " + path);
  nlohmann::json j;
  in >> j;
  Annotations a;
  for (const auto& [k, v] : j.at("roles").items())
    a.roles.emplace(k, role_from_name(v.get<std::string>()));
  for (const auto& [qid, chain] : j.at("support_chains").items())
    a.support_chains.emplace(qid, chain.get<std::vector<std::string>>());
  return a;
}

}  // namespace evokg
