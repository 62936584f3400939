#include "evokg/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace evokg {

double triplet_probability(double s_r, double s_c, double alpha) {
  return (1.0 - alpha) * s_r + alpha * s_c;
}

namespace {

// priority desc, then shorter path, then lexicographic triplet ids.
bool ranked_before(const RankedPath& a, const RankedPath& b) {
  if (a.priority != b.priority) return a.priority > b.priority;
  if (a.path.triplets.size() != b.path.triplets.size())
    return a.path.triplets.size() < b.path.triplets.size();
  if (a.path.triplets != b.path.triplets) return a.path.triplets < b.path.triplets;
  return a.path.start < b.path.start;
}

}  // namespace

void assign_priorities(std::vector<RankedPath>& candidates) {
  if (candidates.empty()) throw std::invalid_argument("assign_priorities: empty path set");
  for (auto& rp : candidates) {
    double sum = 0.0;
    for (const auto& term : rp.terms) sum += std::log(term.p);
    rp.log_avg = sum / static_cast<double>(rp.terms.size());
  }
  double max_s = candidates[0].log_avg;
  for (const auto& rp : candidates) max_s = std::max(max_s, rp.log_avg);
  double z = 0.0;
  for (auto& rp : candidates) {
    rp.priority = std::exp(rp.log_avg - max_s);
    z += rp.priority;
  }
  for (auto& rp : candidates) rp.priority /= z;
}

std::vector<std::string> Retriever::recognize_entities(const Query& q, int n) const {
  if (n < 1) throw std::invalid_argument("recognize_entities: n must be >= 1");
  const EmbeddingVector qv = scorer_.embed_query(q.text);
  std::vector<std::pair<double, std::string>> scored;
  scored.reserve(kg_.entities().size());
  for (const auto& name : kg_.entities()) {
    const double sim = similarity_from_cosine(cosine(qv, scorer_.embed_entity(name)));
    scored.emplace_back(sim, name);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<std::string> out;
  const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(n), scored.size());
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) out.push_back(scored[i].second);
  return out;
}

std::set<TripletId> Retriever::extract_subgraph(const std::vector<std::string>& seeds,
                                                int k) const {
  if (k < 1) throw std::invalid_argument("extract_subgraph: k must be >= 1");
  std::set<TripletId> sub;
  std::set<std::string> visited(seeds.begin(), seeds.end());
  std::vector<std::string> frontier(seeds.begin(), seeds.end());
  for (int hop = 0; hop < k && !frontier.empty(); ++hop) {
    std::vector<std::string> next;
    for (const auto& entity : frontier) {
      for (TripletId tid : kg_.out_edges(entity)) {
        sub.insert(tid);
        const std::string& tail = kg_.triplet(tid).tail;
        if (visited.insert(tail).second) next.push_back(tail);
      }
    }
    frontier = std::move(next);
  }
  return sub;
}

std::vector<ReasoningPath> Retriever::enumerate_paths(const std::set<TripletId>& subgraph,
                                                      const std::string& start,
                                                      int max_hop) const {
  std::vector<ReasoningPath> out;
  std::vector<TripletId> stack;
  std::set<std::string> on_path{start};

  auto dfs = [&](auto&& self, const std::string& entity) -> void {
    if (static_cast<int>(stack.size()) >= max_hop) return;
    for (TripletId tid : kg_.successors_of(entity)) {
      if (!subgraph.count(tid)) continue;
      const Triplet& t = kg_.triplet(tid);
      if (on_path.count(t.tail)) continue;  // simple paths only
      stack.push_back(tid);
      on_path.insert(t.tail);
      out.push_back(ReasoningPath{start, stack});
      self(self, t.tail);
      on_path.erase(t.tail);
      stack.pop_back();
    }
  };
  dfs(dfs, start);
  return out;
}

std::vector<RankedPath> Retriever::retrieve(const Query& q, const RetrievalConfig& config) const {
  const auto seeds = recognize_entities(q, config.top_entities);
  if (seeds.empty()) return {};
  auto sub = extract_subgraph(seeds, config.hops);
  if (config.skip_archived) {
    for (auto it = sub.begin(); it != sub.end();) {
      if (kg_.score_state(*it).archived)
        it = sub.erase(it);
      else
        ++it;
    }
  }

  const EmbeddingVector qv = scorer_.embed_query(q.text);
  const double alpha = kg_.alpha();
  std::vector<RankedPath> candidates;
  std::vector<std::size_t> per_seed_begin;
  for (const auto& seed : seeds) {
    per_seed_begin.push_back(candidates.size());
    for (auto& path : enumerate_paths(sub, seed, config.hops)) {
      RankedPath rp;
      rp.terms.reserve(path.triplets.size());
      for (TripletId tid : path.triplets) {
        PathTerm term;
        term.tid = tid;
        term.s_r = scorer_.relevance(qv, kg_, tid);
        term.s_c = kg_.score(tid);
        term.p = triplet_probability(term.s_r, term.s_c, alpha);
        rp.terms.push_back(term);
      }
      rp.path = std::move(path);
      candidates.push_back(std::move(rp));
    }
  }
  if (candidates.empty()) return {};
  per_seed_begin.push_back(candidates.size());

  // One shared softmax per query; per-seed truncation happens afterwards.
  assign_priorities(candidates);

  std::vector<RankedPath> result;
  for (std::size_t si = 0; si + 1 < per_seed_begin.size(); ++si) {
    std::vector<RankedPath> group(candidates.begin() + per_seed_begin[si],
                                  candidates.begin() + per_seed_begin[si + 1]);
    std::sort(group.begin(), group.end(), ranked_before);
    const std::size_t keep =
        std::min<std::size_t>(static_cast<std::size_t>(config.top_paths), group.size());
    result.insert(result.end(), group.begin(), group.begin() + keep);
  }
  std::sort(result.begin(), result.end(), ranked_before);
  return result;
}

std::string format_context(const KnowledgeGraph& kg, const std::vector<RankedPath>& paths) {
  std::vector<const RankedPath*> ordered;
  ordered.reserve(paths.size());
  for (const auto& p : paths) ordered.push_back(&p);
  std::sort(ordered.begin(), ordered.end(),
            [](const RankedPath* a, const RankedPath* b) { return ranked_before(*a, *b); });
  std::string out;
  for (const RankedPath* rp : ordered) {
    out += rp->path.start;
    for (TripletId tid : rp->path.triplets) {
      const Triplet& t = kg.triplet(tid);
      out += " -[" + t.relation + "]-> " + t.tail;
    }
    out += '\n';
  }
  return out;
}

}  // namespace evokg
