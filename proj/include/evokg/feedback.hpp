#pragma once

#include <random>
#include <string>
#include <vector>

#include "evokg/annotations.hpp"
#include "evokg/llm_client.hpp"
#include "evokg/retrieval.hpp"

namespace evokg {

struct PathJudgment {
  double supportiveness = 0.0;
  double fidelity = 0.0;
  double conflict = 0.0;
};

inline constexpr PathJudgment kNeutralJudgment{0.0, 0.0, 1.0};

struct GateConfig {
  double min_fidelity = 0.3;  // theta_f
  double max_conflict = 0.0;  // theta_c
};

// Token-F1 feedback against ground truth, binned into {1..5}:
// F1=0 -> 1, (0,0.25] -> 2, (0.25,0.5] -> 3, (0.5,0.75] -> 4, else 5.
int oracle_feedback(const std::string& response, const std::vector<std::string>& answers);

// supportiveness if fidelity >= theta_f and conflict <= theta_c, else 0.
// A suppressed path stays in the distribution with neutral utility.
double gate_utility(const PathJudgment& j, const GateConfig& gate = {});

// With probability rate mirrors a non-neutral score to 6 - fs; a score
// of 3 is never flipped.
int flip_feedback(int fs, double rate, std::mt19937_64& rng);

class JudgeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Judge {
 public:
  virtual ~Judge() = default;
  // One judgment per path, same order. Throws JudgeError on transport
  // failure; the caller skips the affected query.
  virtual std::vector<PathJudgment> judge(const Query& q, const KnowledgeGraph& kg,
                                          const std::vector<RankedPath>& paths,
                                          const std::string& response, int fs) = 0;
};

// Deterministic rules over planted-truth annotations:
//   - a path containing a planted distractor/outdated triplet while the
//     response is incorrect (fs <= 2) -> (-1, +1, -1)
//   - a path containing the query's planted supporting chain and no
//     problematic triplet -> (+1, +1, -1)
//   - everything else -> (0, +1, -1)
class ScriptedJudge final : public Judge {
 public:
  explicit ScriptedJudge(Annotations annotations) : annotations_(std::move(annotations)) {}
  std::vector<PathJudgment> judge(const Query& q, const KnowledgeGraph& kg,
                                  const std::vector<RankedPath>& paths,
                                  const std::string& response, int fs) override;

 private:
  Annotations annotations_;
};

// LLM-as-a-judge over the chat-completion client (live, record or
// replay). One call per query covering all paths; unparseable reply
// lines fall back to the neutral judgment so the gate suppresses them.
class LlmJudge final : public Judge {
 public:
  explicit LlmJudge(const LlmClient& client) : client_(client) {}
  std::vector<PathJudgment> judge(const Query& q, const KnowledgeGraph& kg,
                                  const std::vector<RankedPath>& paths,
                                  const std::string& response, int fs) override;

 private:
  const LlmClient& client_;
};

// Parses "index supportiveness fidelity conflict" lines; missing or
// malformed entries yield the neutral judgment.
std::vector<PathJudgment> parse_judge_reply(const std::string& reply, std::size_t n_paths);

}  // namespace evokg
