#include "evokg/harness.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include <json.hpp>

#include "evokg/llm_client.hpp"

namespace evokg {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

std::string TopPathGenerator::generate(const Query& /*q*/, const KnowledgeGraph& kg,
                                       const std::vector<RankedPath>& paths) {
  if (paths.empty()) return "unknown";
  const RankedPath& top = paths.front();
  if (top.path.triplets.empty()) return top.path.start;
  return kg.triplet(top.path.triplets.back()).tail;
}

std::string LlmGenerator::generate(const Query& q, const KnowledgeGraph& kg,
                                   const std::vector<RankedPath>& paths) {
  return generate_response(client_, q.text, format_context(kg, paths), budget_);
}

IngestSummary ingest_triplets(const std::string& path, KnowledgeGraph& kg) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open triplet file: " + path);
  IngestSummary summary;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(path + " line " + std::to_string(line_no) +
                               ": malformed record: " + e.what());
    }
    for (const char* field : {"head", "relation", "tail"}) {
      if (!j.contains(field) || !j[field].is_string())
        throw std::runtime_error(path + " line " + std::to_string(line_no) +
                                 ": missing field '" + field + "'");
    }
    const std::size_t before = kg.size();
    try {
      kg.add_triplet(j["head"].get<std::string>(), j["relation"].get<std::string>(),
                     j["tail"].get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(path + " line " + std::to_string(line_no) + ": " + e.what());
    }
    if (kg.size() == before)
      ++summary.duplicates;
    else
      ++summary.triplets;
  }
  return summary;
}

std::vector<Query> load_queries(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open query file: " + path);
  std::vector<Query> queries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      Query q;
      q.id = j.at("id").get<std::string>();
      q.text = j.at("question").get<std::string>();
      if (j.contains("answers")) q.answers = j["answers"].get<std::vector<std::string>>();
      if (j.contains("feedback")) q.feedback = j["feedback"].get<int>();
      if (q.text.empty()) throw std::runtime_error("empty question");
      queries.push_back(std::move(q));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return queries;
}

double problematic_ratio(const KnowledgeGraph& kg,
                         const std::vector<std::vector<RankedPath>>& retrievals,
                         const Annotations& annotations) {
  double sum = 0.0;
  int counted = 0;
  for (const auto& paths : retrievals) {
    std::set<TripletId> retrieved;
    for (const auto& rp : paths)
      retrieved.insert(rp.path.triplets.begin(), rp.path.triplets.end());
    if (retrieved.empty()) continue;
    int problematic = 0;
    for (TripletId tid : retrieved) {
      if (annotations.is_problematic(kg.triplet(tid))) ++problematic;
    }
    sum += static_cast<double>(problematic) / static_cast<double>(retrieved.size());
    ++counted;
  }
  return counted == 0 ? 0.0 : sum / counted;
}

namespace {

nlohmann::json template_hashes() {
  return {{"generation", prompts::template_hash(prompts::kGenerationTemplate)},
          {"judge", prompts::template_hash(prompts::kJudgeTemplate)},
          {"label", prompts::template_hash(prompts::kLabelTemplate)}};
}

nlohmann::json report_json(const IterationReport& r) {
  return {{"iteration", r.iteration},
          {"mean_loss", r.mean_loss},
          {"mean_expected_utility", r.mean_expected_utility},
          {"alpha", r.alpha},
          {"train_accuracy", r.train_accuracy},
          {"problematic_ratio", r.problematic_ratio},
          {"skipped_queries", r.skipped_queries},
          {"tau_low", r.tau_low},
          {"tau_high", r.tau_high},
          {"proposals", r.proposals},
          {"inserted_shortcuts", r.inserted_shortcuts},
          {"flagged_triplets", r.flagged_triplets},
          {"templates", template_hashes()}};
}

}  // namespace

std::vector<IterationReport> run_training(KnowledgeGraph& kg, std::vector<Query> train,
                                          const RunConfig& config, RunProviders providers,
                                          const std::string& report_dir) {
  if (config.iterations < 0) throw std::invalid_argument("iterations must be non-negative");
  if (config.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (config.noise_rate < 0.0 || config.noise_rate > 1.0)
    throw std::invalid_argument("noise_rate must be in [0, 1]");
  if (config.alpha_init) kg.set_alpha(*config.alpha_init);

  // Wall-clock timings go to a sidecar file so the main report streams
  // stay byte-reproducible for a fixed seed.
  std::ofstream iter_out, grad_out, evo_out, timing_out;
  if (!report_dir.empty()) {
    std::filesystem::create_directories(report_dir);
    iter_out.open(std::filesystem::path(report_dir) / "iterations.jsonl", std::ios::binary);
    grad_out.open(std::filesystem::path(report_dir) / "gradients.jsonl", std::ios::binary);
    evo_out.open(std::filesystem::path(report_dir) / "evolution.jsonl", std::ios::binary);
    timing_out.open(std::filesystem::path(report_dir) / "timings.jsonl", std::ios::binary);
  }

  RelevanceScorer scorer(providers.embedder);
  std::mt19937_64 rng(config.seed);

  RetrievalConfig rc;
  rc.top_entities = config.top_entities;
  rc.top_paths = config.top_paths;
  rc.hops = config.hops;
  rc.skip_archived = config.hard_archive;

  EvolutionConfig evo;
  evo.max_fusion_hop = config.max_fusion_hop;
  evo.suppression_window = config.suppression_window;
  evo.hard_archive = config.hard_archive;

  std::vector<IterationReport> reports;
  for (int h = 1; h <= config.iterations; ++h) {
    IterationReport report;
    report.iteration = kg.iteration() + 1;

    std::shuffle(train.begin(), train.end(), rng);

    double loss_sum = 0.0, expected_sum = 0.0;
    int record_count = 0;
    int acc_sum = 0, acc_count = 0;
    std::vector<std::vector<RankedPath>> retrievals;
    int batch_index = 0;

    for (std::size_t begin = 0; begin < train.size(); begin += config.batch_size) {
      const std::size_t end =
          std::min(train.size(), begin + static_cast<std::size_t>(config.batch_size));
      std::vector<const Query*> batch;
      for (std::size_t i = begin; i < end; ++i) batch.push_back(&train[i]);
      // Deterministic accumulation order within a batch.
      std::sort(batch.begin(), batch.end(),
                [](const Query* a, const Query* b) { return a->id < b->id; });

      std::vector<QueryRecord> records;
      const auto forward_start = Clock::now();
      for (const Query* q : batch) {
        Retriever retriever(kg, scorer);
        std::vector<RankedPath> paths;
        try {
          paths = retriever.retrieve(*q, rc);
        } catch (const EmbeddingError&) {
          ++report.skipped_queries;
          continue;
        }
        std::string response;
        try {
          response = providers.generator.generate(*q, kg, paths);
        } catch (const std::runtime_error&) {
          ++report.skipped_queries;
          continue;
        }
        if (!q->answers.empty()) {
          acc_sum += metrics::accuracy_contains(response, q->answers);
          ++acc_count;
        }
        retrievals.push_back(paths);
        if (paths.empty()) continue;

        int fs = (q->feedback >= 1 && q->feedback <= 5)
                     ? q->feedback
                     : (q->answers.empty() ? 3 : oracle_feedback(response, q->answers));
        if (config.noise_rate > 0.0) fs = flip_feedback(fs, config.noise_rate, rng);

        std::vector<PathJudgment> judgments;
        try {
          judgments = providers.judge.judge(*q, kg, paths, response, fs);
        } catch (const std::runtime_error&) {
          ++report.skipped_queries;  // unjudged batch entry, no backprop
          continue;
        }

        QueryRecord record;
        record.query_id = q->id;
        record.alpha = kg.alpha();
        record.utilities.reserve(paths.size());
        for (const auto& j : judgments) record.utilities.push_back(gate_utility(j, config.gate));
        record.utilities.resize(paths.size(), 0.0);
        record.paths = std::move(paths);
        records.push_back(std::move(record));
      }
      report.forward_ms += ms_since(forward_start);

      const auto backward_start = Clock::now();
      if (!records.empty()) {
        GradientReport grads = accumulate_gradients(records, config.gradient_mode);
        apply_updates(kg, grads, config.eta);
        loss_sum += grads.loss * grads.queries;
        expected_sum += grads.expected * grads.queries;
        record_count += grads.queries;

        if (grad_out.is_open()) {
          std::vector<std::pair<double, TripletId>> top;
          for (const auto& [tid, g] : grads.d_score) top.emplace_back(std::abs(g), tid);
          std::sort(top.begin(), top.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
          });
          nlohmann::json top_json = nlohmann::json::array();
          for (std::size_t i = 0; i < std::min<std::size_t>(5, top.size()); ++i) {
            const Triplet& t = kg.triplet(top[i].second);
            top_json.push_back({{"tid", top[i].second},
                                {"head", t.head},
                                {"relation", t.relation},
                                {"tail", t.tail},
                                {"abs_gradient", top[i].first}});
          }
          grad_out << nlohmann::json{{"iteration", report.iteration},
                                     {"batch", batch_index},
                                     {"loss", grads.loss},
                                     {"expected_utility", grads.expected},
                                     {"alpha", kg.alpha()},
                                     {"d_alpha", grads.d_alpha},
                                     {"top_gradients", top_json}}
                          .dump()
                   << '\n';
        }
      }
      report.backward_ms += ms_since(backward_start);
      ++batch_index;
    }

    // KG evolution once per iteration, after the last batch commits.
    EvolutionSummary evo_summary = evolve(kg, evo, providers.labeler);
    report.tau_low = evo_summary.thresholds.low;
    report.tau_high = evo_summary.thresholds.high;
    report.proposals = evo_summary.proposal_count;
    report.inserted_shortcuts = static_cast<int>(evo_summary.inserted.size());
    report.flagged_triplets = static_cast<int>(evo_summary.flagged.size());

    report.mean_loss = record_count > 0 ? loss_sum / record_count : 0.0;
    report.mean_expected_utility = record_count > 0 ? expected_sum / record_count : 0.0;
    report.alpha = kg.alpha();
    report.train_accuracy =
        acc_count > 0 ? static_cast<double>(acc_sum) / acc_count : 0.0;
    if (providers.annotations != nullptr)
      report.problematic_ratio = problematic_ratio(kg, retrievals, *providers.annotations);

    if (iter_out.is_open()) iter_out << report_json(report).dump() << '\n';
    if (timing_out.is_open())
      timing_out << nlohmann::json{{"iteration", report.iteration},
                                   {"forward_ms", report.forward_ms},
                                   {"backward_ms", report.backward_ms}}
                        .dump()
                 << '\n';
    if (evo_out.is_open()) {
      nlohmann::json inserted = nlohmann::json::array();
      for (TripletId tid : evo_summary.inserted) {
        const Triplet& t = kg.triplet(tid);
        inserted.push_back({{"head", t.head}, {"relation", t.relation}, {"tail", t.tail}});
      }
      evo_out << nlohmann::json{{"iteration", report.iteration},
                                {"tau_low", report.tau_low},
                                {"tau_high", report.tau_high},
                                {"proposals", report.proposals},
                                {"inserted", inserted},
                                {"flagged", evo_summary.flagged}}
                     .dump()
              << '\n';
    }
    reports.push_back(report);
  }
  return reports;
}

metrics::EvalResult evaluate(const KnowledgeGraph& kg, const std::vector<Query>& test,
                             const RunConfig& config, EmbeddingProvider& embedder,
                             ResponseGenerator& generator) {
  if (test.empty()) throw std::invalid_argument("empty test set");
  RelevanceScorer scorer(embedder);
  RetrievalConfig rc;
  rc.top_entities = config.top_entities;
  rc.top_paths = config.top_paths;
  rc.hops = config.hops;
  rc.skip_archived = config.hard_archive;

  metrics::EvalResult result;
  for (const auto& q : test) {
    Retriever retriever(kg, scorer);
    auto paths = retriever.retrieve(q, rc);
    const std::string response = generator.generate(q, kg, paths);
    metrics::QueryEval qe;
    qe.query_id = q.id;
    qe.acc = metrics::accuracy_contains(response, q.answers);
    qe.em = metrics::exact_match(response, q.answers);
    qe.f1 = metrics::token_f1(response, q.answers);
    result.acc += qe.acc;
    result.em += qe.em;
    result.f1 += qe.f1;
    result.per_query.push_back(std::move(qe));
  }
  const double n = static_cast<double>(test.size());
  result.acc /= n;
  result.em /= n;
  result.f1 /= n;
  return result;
}

}  // namespace evokg
