#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "evokg/backprop.hpp"
#include "evokg/embedding.hpp"
#include "evokg/evolution.hpp"
#include "evokg/feedback.hpp"
#include "evokg/metrics.hpp"
#include "evokg/retrieval.hpp"
#include "evokg/synthetic.hpp"

namespace evokg {

struct RunConfig {
  int top_entities = 10;  // N
  int top_paths = 10;     // M
  int hops = 2;           // k
  int max_fusion_hop = 3; // H
  int suppression_window = 3;
  bool hard_archive = false;
  std::optional<double> alpha_init;  // unset keeps the snapshot's alpha
  double eta = 0.5;
  double noise_rate = 0.0;
  int iterations = 10;
  int batch_size = 20;
  std::uint64_t seed = 0;
  GateConfig gate;
  GradientMode gradient_mode = GradientMode::exact;
  int prompt_token_budget = 3000;
};

struct IterationReport {
  int iteration = 0;
  double mean_loss = 0.0;
  double mean_expected_utility = 0.0;
  double alpha = 0.0;
  double train_accuracy = 0.0;
  double problematic_ratio = -1.0;  // -1 when no annotations are available
  int skipped_queries = 0;
  double tau_low = 0.0;
  double tau_high = 0.0;
  int proposals = 0;
  int inserted_shortcuts = 0;
  int flagged_triplets = 0;
  double forward_ms = 0.0;
  double backward_ms = 0.0;
};

class ResponseGenerator {
 public:
  virtual ~ResponseGenerator() = default;
  virtual std::string generate(const Query& q, const KnowledgeGraph& kg,
                               const std::vector<RankedPath>& paths) = 0;
};

// Offline generator: answers with the top-ranked path's terminal entity.
class TopPathGenerator final : public ResponseGenerator {
 public:
  std::string generate(const Query& q, const KnowledgeGraph& kg,
                       const std::vector<RankedPath>& paths) override;
};

class LlmGenerator final : public ResponseGenerator {
 public:
  LlmGenerator(const LlmClient& client, int prompt_token_budget = 3000)
      : client_(client), budget_(prompt_token_budget) {}
  std::string generate(const Query& q, const KnowledgeGraph& kg,
                       const std::vector<RankedPath>& paths) override;

 private:
  const LlmClient& client_;
  int budget_;
};

struct IngestSummary {
  std::size_t triplets = 0;
  std::size_t duplicates = 0;
};

// Line-delimited JSON records with fields head, relation, tail. Errors
// name the offending line and field.
IngestSummary ingest_triplets(const std::string& path, KnowledgeGraph& kg);

// Line-delimited JSON records with fields id, question, answers and an
// optional pre-scored feedback column.
std::vector<Query> load_queries(const std::string& path);

// Fraction of retrieved triplets annotated problematic, averaged over
// queries with at least one retrieved triplet.
double problematic_ratio(const KnowledgeGraph& kg,
                         const std::vector<std::vector<RankedPath>>& retrievals,
                         const Annotations& annotations);

struct RunProviders {
  EmbeddingProvider& embedder;
  Judge& judge;
  ResponseGenerator& generator;
  ShortcutLabeler labeler;
  const Annotations* annotations = nullptr;  // enables the scripted metrics
};

// Closed loop: per iteration, shuffle the train queries, process them in
// batches (retrieve, generate, feedback, judge, gate, backprop, apply),
// then evolve the graph once. Reports stream to report_dir when set.
std::vector<IterationReport> run_training(KnowledgeGraph& kg, std::vector<Query> train,
                                          const RunConfig& config, RunProviders providers,
                                          const std::string& report_dir = {});

// Retrieval + generation with learning disabled. Throws on an empty set.
metrics::EvalResult evaluate(const KnowledgeGraph& kg, const std::vector<Query>& test,
                             const RunConfig& config, EmbeddingProvider& embedder,
                             ResponseGenerator& generator);

}  // namespace evokg
