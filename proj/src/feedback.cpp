#include "evokg/feedback.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "evokg/metrics.hpp"
#include "evokg/text.hpp"

namespace evokg {

int oracle_feedback(const std::string& response, const std::vector<std::string>& answers) {
  if (answers.empty()) throw std::invalid_argument("oracle_feedback requires answers");
  const double f1 = metrics::token_f1(response, answers);
  if (f1 <= 0.0) return 1;
  if (f1 <= 0.25) return 2;
  if (f1 <= 0.5) return 3;
  if (f1 <= 0.75) return 4;
  return 5;
}

double gate_utility(const PathJudgment& j, const GateConfig& gate) {
  const double fidelity = std::clamp(j.fidelity, -1.0, 1.0);
  const double conflict = std::clamp(j.conflict, -1.0, 1.0);
  if (fidelity >= gate.min_fidelity && conflict <= gate.max_conflict)
    return std::clamp(j.supportiveness, -1.0, 1.0);
  return 0.0;
}

int flip_feedback(int fs, double rate, std::mt19937_64& rng) {
  if (fs < 1 || fs > 5) throw std::invalid_argument("feedback score out of range");
  if (rate < 0.0 || rate > 1.0) throw std::invalid_argument("flip rate out of range");
  if (fs == 3) return fs;  // neutral scores are never flipped
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (u(rng) < rate) return 6 - fs;
  return fs;
}

std::vector<PathJudgment> ScriptedJudge::judge(const Query& q, const KnowledgeGraph& kg,
                                               const std::vector<RankedPath>& paths,
                                               const std::string& /*response*/, int fs) {
  std::vector<PathJudgment> out;
  out.reserve(paths.size());

  const auto chain_it = annotations_.support_chains.find(q.id);
  const std::vector<std::string>* chain =
      chain_it == annotations_.support_chains.end() ? nullptr : &chain_it->second;

  for (const auto& rp : paths) {
    bool has_problematic = false;
    std::set<std::string> keys;
    for (TripletId tid : rp.path.triplets) {
      const Triplet& t = kg.triplet(tid);
      if (annotations_.is_problematic(t)) has_problematic = true;
      keys.insert(Annotations::key(t));
    }
    bool contains_chain = chain != nullptr && !chain->empty();
    if (contains_chain)
      for (const std::string& k : *chain)
        if (!keys.count(k)) { contains_chain = false; break; }

    if (has_problematic && fs <= 2) {
      out.push_back({-1.0, 1.0, -1.0});  // incorrect response traced to planted noise
    } else if (contains_chain && !has_problematic) {
      out.push_back({1.0, 1.0, -1.0});
    } else {
      out.push_back({0.0, 1.0, -1.0});
    }
  }
  return out;
}

std::vector<PathJudgment> parse_judge_reply(const std::string& reply, std::size_t n_paths) {
  std::vector<PathJudgment> out(n_paths, kNeutralJudgment);
  std::istringstream in(reply);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    long index = 0;
    double s = 0.0, f = 0.0, c = 0.0;
    std::string trailing;
    if (!(ls >> index >> s >> f >> c) || (ls >> trailing)) continue;
    if (index < 0 || static_cast<std::size_t>(index) >= n_paths) continue;
    if (!std::isfinite(s) || !std::isfinite(f) || !std::isfinite(c)) continue;
    out[static_cast<std::size_t>(index)] = {std::clamp(s, -1.0, 1.0), std::clamp(f, -1.0, 1.0),
                                            std::clamp(c, -1.0, 1.0)};
  }
  return out;
}

std::vector<PathJudgment> LlmJudge::judge(const Query& q, const KnowledgeGraph& kg,
                                          const std::vector<RankedPath>& paths,
                                          const std::string& response, int fs) {
  std::string path_block;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    path_block += std::to_string(i) + ": " + paths[i].path.start;
    for (TripletId tid : paths[i].path.triplets) {
      const Triplet& t = kg.triplet(tid);
      path_block += " -[" + t.relation + "]-> " + t.tail;
    }
    path_block += '\n';
  }

  std::string prompt = prompts::kJudgeTemplate;
  auto replace = [&prompt](const std::string& needle, const std::string& value) {
    std::size_t pos;
    while ((pos = prompt.find(needle)) != std::string::npos)
      prompt.replace(pos, needle.size(), value);
  };
  replace("{fs}", std::to_string(fs));
  replace("{question}", q.text);
  replace("{response}", response);
  replace("{paths}", path_block);

  CompletionRequest req;
  req.prompt = prompt;
  req.purpose = Purpose::judge;
  req.temperature = 0.0;
  req.max_tokens = 16 * static_cast<int>(paths.size()) + 64;

  std::string reply;
  try {
    reply = client_.complete(req);
  } catch (const FixtureMissError&) {
    throw;
  } catch (const TransportError& e) {
    throw JudgeError(std::string("judge call failed: ") + e.what());
  }
  return parse_judge_reply(reply, paths.size());
}

}  // namespace evokg
