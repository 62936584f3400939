#include "evokg/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace evokg {

namespace {

constexpr int kSnapshotVersion = 1;

std::string triplet_key(const std::string& head, const std::string& relation,
                        const std::string& tail) {
  std::string key;
  key.reserve(head.size() + relation.size() + tail.size() + 2);
  key.append(head).push_back('\x1f');
  key.append(relation).push_back('\x1f');
  key.append(tail);
  return key;
}

const std::vector<TripletId> kNoEdges;

}  // namespace

std::string_view origin_name(Origin o) {
  return o == Origin::base ? "base" : "shortcut";
}

Origin origin_from_name(std::string_view name) {
  if (name == "base") return Origin::base;
  if (name == "shortcut") return Origin::shortcut;
  throw GraphError("unknown triplet origin: " + std::string(name));
}

TripletId KnowledgeGraph::add_triplet(const std::string& head, const std::string& relation,
                                      const std::string& tail, Origin origin,
                                      std::optional<double> score) {
  if (relation.empty()) throw std::invalid_argument("triplet relation must be non-empty");
  if (head.empty() || tail.empty()) throw std::invalid_argument("entity name must be non-empty");
  if (origin == Origin::shortcut && head == tail)
    throw std::invalid_argument("shortcut must not be a self-loop: " + head);

  const std::string key = triplet_key(head, relation, tail);
  if (auto it = by_key_.find(key); it != by_key_.end()) return it->second;

  const auto tid = static_cast<TripletId>(triplets_.size());
  Triplet t;
  t.tid = tid;
  t.head = head;
  t.relation = relation;
  t.tail = tail;
  t.origin = origin;
  t.created_iteration = origin == Origin::shortcut ? std::max(iteration_, 1) : iteration_;
  triplets_.push_back(std::move(t));

  ScoreState st;
  if (score) st.s = std::clamp(*score, kScoreFloor, 1.0);
  scores_.push_back(st);

  entities_.insert(head);
  entities_.insert(tail);
  out_index_[head].push_back(tid);
  in_index_[tail].push_back(tid);
  by_key_.emplace(key, tid);
  return tid;
}

const Triplet& KnowledgeGraph::triplet(TripletId tid) const {
  if (tid >= triplets_.size()) throw GraphError("unknown triplet id " + std::to_string(tid));
  return triplets_[tid];
}

const ScoreState& KnowledgeGraph::score_state(TripletId tid) const {
  if (tid >= scores_.size()) throw GraphError("unknown triplet id " + std::to_string(tid));
  return scores_[tid];
}

void KnowledgeGraph::set_score(TripletId tid, double s) {
  if (!std::isfinite(s)) throw GraphError("non-finite score for triplet " + std::to_string(tid));
  if (tid >= scores_.size()) throw GraphError("unknown triplet id " + std::to_string(tid));
  scores_[tid].s = std::clamp(s, kScoreFloor, 1.0);
}

void KnowledgeGraph::set_consecutive_low(TripletId tid, int n) {
  if (tid >= scores_.size()) throw GraphError("unknown triplet id " + std::to_string(tid));
  scores_[tid].consecutive_low = n;
}

void KnowledgeGraph::set_archived(TripletId tid, bool archived) {
  if (tid >= scores_.size()) throw GraphError("unknown triplet id " + std::to_string(tid));
  scores_[tid].archived = archived;
}

std::vector<TripletId> KnowledgeGraph::sorted_by_priority(std::vector<TripletId> ids) const {
  std::sort(ids.begin(), ids.end(), [this](TripletId a, TripletId b) {
    const double sa = scores_[a].s;
    const double sb = scores_[b].s;
    if (sa != sb) return sa > sb;
    const Triplet& ta = triplets_[a];
    const Triplet& tb = triplets_[b];
    if (ta.relation != tb.relation) return ta.relation < tb.relation;
    return ta.tail < tb.tail;
  });
  return ids;
}

std::vector<TripletId> KnowledgeGraph::chain_successors(TripletId tid) const {
  return successors_of(triplet(tid).tail);
}

std::vector<TripletId> KnowledgeGraph::successors_of(const std::string& entity) const {
  auto it = out_index_.find(entity);
  if (it == out_index_.end()) return {};
  return sorted_by_priority(it->second);
}

const std::vector<TripletId>& KnowledgeGraph::out_edges(const std::string& entity) const {
  auto it = out_index_.find(entity);
  return it == out_index_.end() ? kNoEdges : it->second;
}

const std::vector<TripletId>& KnowledgeGraph::in_edges(const std::string& entity) const {
  auto it = in_index_.find(entity);
  return it == in_index_.end() ? kNoEdges : it->second;
}

ScoreStats KnowledgeGraph::contribution_stats() const {
  if (scores_.empty()) throw GraphError("contribution_stats on empty graph");
  double sum = 0.0;
  for (const auto& st : scores_) sum += st.s;
  const double mean = sum / static_cast<double>(scores_.size());
  double sq = 0.0;
  for (const auto& st : scores_) {
    const double d = st.s - mean;
    sq += d * d;
  }
  return {mean, std::sqrt(sq / static_cast<double>(scores_.size()))};
}

bool KnowledgeGraph::has_edge(const std::string& head, const std::string& tail) const {
  auto it = out_index_.find(head);
  if (it == out_index_.end()) return false;
  for (TripletId tid : it->second) {
    if (triplets_[tid].tail == tail) return true;
  }
  return false;
}

std::optional<TripletId> KnowledgeGraph::find(const std::string& head,
                                              const std::string& relation,
                                              const std::string& tail) const {
  auto it = by_key_.find(triplet_key(head, relation, tail));
  if (it == by_key_.end()) return std::nullopt;
  return it->second;
}

void KnowledgeGraph::set_alpha(double a) {
  if (!std::isfinite(a)) throw GraphError("non-finite alpha");
  alpha_ = std::clamp(a, 0.0, 1.0);
}

void KnowledgeGraph::audit_indices() const {
  std::map<std::string, std::vector<TripletId>> out;
  std::map<std::string, std::vector<TripletId>> in;
  for (const auto& t : triplets_) {
    if (!entities_.count(t.head) || !entities_.count(t.tail))
      throw GraphError("triplet references unregistered entity: " + t.head + " / " + t.tail);
    out[t.head].push_back(t.tid);
    in[t.tail].push_back(t.tid);
  }
  if (out != out_index_ || in != in_index_) throw GraphError("adjacency index audit failed");
}

void KnowledgeGraph::save_snapshot(const std::string& path) const {
  nlohmann::json j;
  j["schema_version"] = kSnapshotVersion;
  j["alpha"] = alpha_;
  j["iteration"] = iteration_;
  nlohmann::json trips = nlohmann::json::array();
  for (const auto& t : triplets_) {
    const ScoreState& st = scores_[t.tid];
    trips.push_back({{"head", t.head},
                     {"relation", t.relation},
                     {"tail", t.tail},
                     {"origin", origin_name(t.origin)},
                     {"score", st.s},
                     {"consecutive_low", st.consecutive_low},
                     {"archived", st.archived},
                     {"created_iteration", t.created_iteration}});
  }
  j["triplets"] = std::move(trips);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw GraphError("cannot open snapshot path for writing: " + path);
  out << j.dump() << '\n';
}

KnowledgeGraph KnowledgeGraph::load_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw GraphError("cannot open snapshot: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw GraphError("corrupt snapshot " + path + ": " + e.what());
  }
  if (!j.contains("schema_version") || !j["schema_version"].is_number_integer())
    throw GraphError("snapshot " + path + " missing schema_version");
  const int version = j["schema_version"].get<int>();
  if (version != kSnapshotVersion)
    throw GraphError("snapshot " + path + " has unsupported schema_version " +
                     std::to_string(version));
  KnowledgeGraph kg;
  try {
    kg.alpha_ = j.at("alpha").get<double>();
    kg.iteration_ = j.at("iteration").get<int>();
    for (const auto& tj : j.at("triplets")) {
      Triplet t;
      t.tid = static_cast<TripletId>(kg.triplets_.size());
      t.head = tj.at("head").get<std::string>();
      t.relation = tj.at("relation").get<std::string>();
      t.tail = tj.at("tail").get<std::string>();
      t.origin = origin_from_name(tj.at("origin").get<std::string>());
      t.created_iteration = tj.at("created_iteration").get<int>();
      ScoreState st;
      st.s = tj.at("score").get<double>();
      st.consecutive_low = tj.at("consecutive_low").get<int>();
      st.archived = tj.at("archived").get<bool>();
      const std::string key = triplet_key(t.head, t.relation, t.tail);
      if (kg.by_key_.count(key)) throw GraphError("duplicate triplet in snapshot: " + key);
      kg.entities_.insert(t.head);
      kg.entities_.insert(t.tail);
      kg.out_index_[t.head].push_back(t.tid);
      kg.in_index_[t.tail].push_back(t.tid);
      kg.by_key_.emplace(key, t.tid);
      kg.triplets_.push_back(std::move(t));
      kg.scores_.push_back(st);
    }
  } catch (const nlohmann::json::exception& e) {
    throw GraphError("corrupt snapshot " + path + ": " + e.what());
  }
  return kg;
}

bool KnowledgeGraph::observably_equal(const KnowledgeGraph& other) const {
  if (alpha_ != other.alpha_ || iteration_ != other.iteration_) return false;
  if (triplets_.size() != other.triplets_.size()) return false;
  for (std::size_t i = 0; i < triplets_.size(); ++i) {
    const Triplet& a = triplets_[i];
    const Triplet& b = other.triplets_[i];
    if (a.head != b.head || a.relation != b.relation || a.tail != b.tail ||
        a.origin != b.origin || a.created_iteration != b.created_iteration)
      return false;
    const ScoreState& sa = scores_[i];
    const ScoreState& sb = other.scores_[i];
    if (sa.s != sb.s || sa.consecutive_low != sb.consecutive_low || sa.archived != sb.archived)
      return false;
  }
  return entities_ == other.entities_;
}

}  // namespace evokg
