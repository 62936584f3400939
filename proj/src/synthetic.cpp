#include "evokg/synthetic.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include <json.hpp>

namespace evokg {

namespace {

std::string pad4(int n) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d", n);
  return buf;
}

Triplet make_triplet(std::string head, std::string relation, std::string tail) {
  Triplet t;
  t.head = std::move(head);
  t.relation = std::move(relation);
  t.tail = std::move(tail);
  return t;
}

// Tail relation repeated twice so the terminal hop outweighs the first
// hop in the bag-of-tokens similarity; otherwise the 1-hop prefix of a
// chain would always outrank the full chain.
std::string query_text(const std::string& last_relation, const std::string& start) {
  return "what " + last_relation + " " + last_relation + " of " + start;
}

}  // namespace

SyntheticCorpus generate_synthetic(const SynthParams& params) {
  if (params.chains < 1) throw std::invalid_argument("need at least one planted chain");
  if (params.train_per_chain < 1) throw std::invalid_argument("train_per_chain must be >= 1");
  if (params.distractors < 0 || params.outdated < 0)
    throw std::invalid_argument("noise counts must be non-negative");
  if (params.background_entities < 0 || params.branching < 0)
    throw std::invalid_argument("background parameters must be non-negative");
  if (params.background_entities > 0 && params.branching > 0 && params.background_entities < 2)
    throw std::invalid_argument("background edges need at least two background entities");

  if (params.distractors + params.outdated > params.chains)
    throw std::invalid_argument("each subgraph hosts at most one planted noise triplet; "
                                "reduce distractors + outdated or add chains");

  SyntheticCorpus corpus;
  auto& ann = corpus.annotations;

  auto plant = [&](Triplet t, TripletRole role) {
    ann.roles[Annotations::key(t)] = role;
    corpus.triplets.push_back(std::move(t));
    return Annotations::key(corpus.triplets.back());
  };

  // The hub fan-out keeps suppressed noise below the per-entity top-M
  // retrieval cut (M defaults to 10) once its score has collapsed.
  constexpr int kFillerFanout = 10;

  int remaining_d = params.distractors;
  int remaining_o = params.outdated;

  for (int i = 0; i < params.chains; ++i) {
    const std::string si = pad4(i);
    const std::string tsrc = "tsrc" + si;
    const std::string hub = "mid" + si;
    const std::string ans = "ans" + si;
    const std::string rel_last = "rtb" + si;
    const bool three_hop = (i % 5 == 4);

    bool has_distractor = false, has_outdated = false;
    if (i % 2 == 0 && remaining_d > 0) {
      has_distractor = true;
      --remaining_d;
    } else if (remaining_o > 0) {
      has_outdated = true;
      --remaining_o;
    } else if (remaining_d > 0) {
      has_distractor = true;
      --remaining_d;
    }

    // The outdated edge contradicts the chain's final supporting triplet
    // (same head and relation, stale tail). Emitted first so that, before
    // any score separates them, the priority tie resolves to the stale
    // fact and the planted error is actually exercised.
    if (has_outdated)
      plant(make_triplet(hub, rel_last, "old" + si), TripletRole::outdated);

    // Test chain tsrc→…→hub→ans; only its final hop doubles as a train
    // target, so the full test path never appears in training.
    std::vector<std::string> test_chain;
    if (three_hop) {
      test_chain.push_back(plant(make_triplet(tsrc, "rta" + si, "imd" + si), TripletRole::support));
      test_chain.push_back(plant(make_triplet("imd" + si, "rtm" + si, hub), TripletRole::support));
    } else {
      test_chain.push_back(plant(make_triplet(tsrc, "rta" + si, hub), TripletRole::support));
    }
    test_chain.push_back(plant(make_triplet(hub, rel_last, ans), TripletRole::support));
    {
      Query q;
      q.id = "test" + si;
      q.text = query_text(rel_last, tsrc);
      q.answers = {ans};
      ann.support_chains[q.id] = test_chain;
      corpus.test_queries.push_back(std::move(q));
    }

    // Train query 0 targets the chain's final hop directly; later train
    // queries target 2-hop branch chains ending at fresh sink entities.
    for (int j = 0; j < params.train_per_chain; ++j) {
      Query q;
      q.id = "train" + si + "q" + std::to_string(j);
      std::vector<std::string> keys;
      if (j == 0) {
        q.text = query_text(rel_last, hub);
        q.answers = {ans};
        keys.push_back(Annotations::key(hub, rel_last, ans));
      } else {
        const std::string sj = std::to_string(j);
        const std::string aux = "aux" + si + "b" + sj;
        const std::string fin = "fin" + si + "b" + sj;
        keys.push_back(plant(make_triplet(hub, "rkd" + si + sj, aux), TripletRole::support));
        keys.push_back(plant(make_triplet(aux, "rke" + si + sj, fin), TripletRole::support));
        q.text = query_text("rke" + si + sj, hub);
        q.answers = {fin};
      }
      ann.support_chains[q.id] = std::move(keys);
      corpus.train_queries.push_back(std::move(q));
    }

    // The distractor copies the question phrasing of the hub's train
    // queries (and, via the shared relation tokens, of the test query),
    // so it initially outranks every supporting chain.
    if (has_distractor) {
      std::string label = "what " + rel_last + " " + rel_last;
      if (params.train_per_chain > 1)
        label += " rke" + si + "1 rke" + si + "1";
      label += " of";
      plant(make_triplet(hub, label, "wrg" + si), TripletRole::distractor);
    }

    for (int k = 0; k < kFillerFanout; ++k) {
      const std::string sk = std::to_string(k);
      corpus.triplets.push_back(make_triplet(hub, "fil" + si + "k" + sk, "pad" + si + "k" + sk));
    }
  }

  // Background filler, disconnected from the planted subgraphs.
  std::mt19937_64 rng(params.seed);
  if (params.background_entities > 0 && params.branching > 0) {
    std::vector<std::string> bg;
    bg.reserve(static_cast<std::size_t>(params.background_entities));
    for (int b = 0; b < params.background_entities; ++b) bg.push_back("zzz" + pad4(b));
    int edge_counter = 0;
    std::uniform_int_distribution<int> pick(0, params.background_entities - 1);
    for (int b = 0; b < params.background_entities; ++b) {
      std::set<int> targets;
      for (int e = 0; e < params.branching; ++e) {
        int t = pick(rng);
        if (t == b || !targets.insert(t).second) continue;
        corpus.triplets.push_back(
            make_triplet(bg[b], "rbg" + std::to_string(edge_counter++), bg[t]));
      }
    }
  }

  audit_path_disjointness(corpus);
  return corpus;
}

void audit_path_disjointness(const SyntheticCorpus& corpus) {
  std::set<std::vector<std::string>> train_paths;
  for (const auto& q : corpus.train_queries) {
    auto it = corpus.annotations.support_chains.find(q.id);
    if (it != corpus.annotations.support_chains.end()) train_paths.insert(it->second);
  }
  for (const auto& q : corpus.test_queries) {
    auto it = corpus.annotations.support_chains.find(q.id);
    if (it == corpus.annotations.support_chains.end()) continue;
    if (train_paths.count(it->second))
      throw std::runtime_error("test reasoning path also used as a train target: " + q.id);
  }
}

void write_corpus(const SyntheticCorpus& corpus, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  {
    std::ofstream out(fs::path(out_dir) / "triplets.jsonl", std::ios::binary);
    for (const auto& t : corpus.triplets) {
      nlohmann::json j{{"head", t.head}, {"relation", t.relation}, {"tail", t.tail}};
      out << j.dump() << '\n';
    }
  }
  auto write_queries = [&](const std::vector<Query>& queries, const std::string& name) {
    std::ofstream out(fs::path(out_dir) / name, std::ios::binary);
    for (const auto& q : queries) {
      nlohmann::json j{{"id", q.id}, {"question", q.text}, {"answers", q.answers}};
      out << j.dump() << '\n';
    }
  };
  write_queries(corpus.train_queries, "train_queries.jsonl");
  write_queries(corpus.test_queries, "test_queries.jsonl");
  corpus.annotations.save((fs::path(out_dir) / "annotations.json").string());
}

}  // namespace evokg
