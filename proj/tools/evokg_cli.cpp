#include <iostream>
#include <memory>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "evokg/harness.hpp"
#include "evokg/llm_client.hpp"

namespace {

using namespace evokg;

struct ProviderOptions {
  std::string embedding = "local";  // local | remote
  std::string judge = "scripted";   // llm | scripted | replay
  std::string labeler = "fallback"; // llm | fallback
  std::string generator = "synthetic";  // synthetic | llm | replay
  std::string model = "gpt-4o-mini";
  std::string fixture_dir = "fixtures";
  std::string annotations_path;
};

void add_provider_flags(CLI::App* cmd, ProviderOptions& opts) {
  cmd->add_option("--embedding", opts.embedding, "Embedding provider")
      ->check(CLI::IsMember({"local", "remote"}));
  cmd->add_option("--judge", opts.judge, "Path judge provider")
      ->check(CLI::IsMember({"llm", "scripted", "replay"}));
  cmd->add_option("--labeler", opts.labeler, "Shortcut labeler")
      ->check(CLI::IsMember({"llm", "fallback"}));
  cmd->add_option("--generator", opts.generator, "Response generator")
      ->check(CLI::IsMember({"synthetic", "llm", "replay"}));
  cmd->add_option("--model", opts.model, "Chat-completion model name");
  cmd->add_option("--fixture-dir", opts.fixture_dir, "Record/replay fixture directory");
  cmd->add_option("--annotations", opts.annotations_path,
                  "Planted-truth annotations (scripted judge, problematic ratio)");
}

void add_run_flags(CLI::App* cmd, RunConfig& config, std::optional<double>& alpha_init) {
  cmd->add_option("--n-entities", config.top_entities, "Top-N query entities");
  cmd->add_option("--m-paths", config.top_paths, "Top-M paths per start entity");
  cmd->add_option("--k-hop", config.hops, "Subgraph extraction hops");
  cmd->add_option("--max-fusion-hop", config.max_fusion_hop, "Max fusion chain length");
  cmd->add_option("--alpha-init", alpha_init, "Initial alpha (defaults to snapshot value)");
  cmd->add_option("--lr", config.eta, "Learning rate");
  cmd->add_option("--iterations", config.iterations, "Training iterations");
  cmd->add_option("--batch-size", config.batch_size, "Queries per update batch");
  cmd->add_option("--noise-rate", config.noise_rate, "Feedback flip probability");
  cmd->add_option("--seed", config.seed, "RNG seed");
  cmd->add_option("--suppression-window", config.suppression_window,
                  "Consecutive-low iterations before flagging");
  cmd->add_flag("--hard-archive", config.hard_archive,
                "Exclude flagged triplets from retrieval");
  cmd->add_flag_callback(
      "--paper-literal-gradient",
      [&config]() { config.gradient_mode = GradientMode::paper_literal; },
      "Use the literal printed gradient formula instead of the exact one");
}

struct Providers {
  std::unique_ptr<EmbeddingProvider> embedder;
  std::unique_ptr<LlmClient> client;
  std::unique_ptr<Judge> judge;
  std::unique_ptr<ResponseGenerator> generator;
  ShortcutLabeler labeler;
  std::optional<Annotations> annotations;
};

Providers build_providers(const ProviderOptions& opts, int prompt_token_budget,
                          bool need_judge = true) {
  Providers p;
  if (opts.embedding == "local") {
    p.embedder = std::make_unique<LocalHashEmbedder>();
  } else {
    p.embedder = RemoteEmbedder::from_env();
  }

  const bool needs_llm =
      (need_judge && (opts.judge == "llm" || opts.judge == "replay")) || opts.labeler == "llm" ||
      opts.generator == "llm" || opts.generator == "replay";
  if (needs_llm) {
    const bool replay_only = (!need_judge || opts.judge != "llm") && opts.labeler != "llm" &&
                             opts.generator != "llm";
    p.client = std::make_unique<LlmClient>(LlmClient::from_env(
        replay_only ? ClientMode::replay : ClientMode::live, opts.fixture_dir, opts.model));
  }

  if (!opts.annotations_path.empty()) p.annotations = Annotations::load(opts.annotations_path);

  if (need_judge) {
    if (opts.judge == "scripted") {
      if (!p.annotations)
        throw CLI::ValidationError("--judge scripted requires --annotations");
      p.judge = std::make_unique<ScriptedJudge>(*p.annotations);
    } else {
      p.judge = std::make_unique<LlmJudge>(*p.client);
    }
  }

  if (opts.generator == "synthetic") {
    p.generator = std::make_unique<TopPathGenerator>();
  } else {
    p.generator = std::make_unique<LlmGenerator>(*p.client, prompt_token_budget);
  }

  if (opts.labeler == "llm") {
    const LlmClient* client = p.client.get();
    p.labeler = [client](const std::vector<std::string>& relations) {
      std::string block;
      for (const auto& r : relations) block += "- " + r + "\n";
      std::string prompt = prompts::kLabelTemplate;
      const std::string needle = "{relations}";
      if (auto pos = prompt.find(needle); pos != std::string::npos)
        prompt.replace(pos, needle.size(), block);
      CompletionRequest req;
      req.prompt = prompt;
      req.purpose = Purpose::label;
      req.max_tokens = 32;
      try {
        std::string label = client->complete(req);
        while (!label.empty() && (label.back() == '\n' || label.back() == ' '))
          label.pop_back();
        if (!label.empty()) return label;
      } catch (const std::runtime_error&) {
        // fall through to the deterministic label
      }
      return fallback_label(relations);
    };
  } else {
    p.labeler = fallback_label;
  }
  return p;
}

int cmd_ingest(const std::string& triplets_file, const std::string& snapshot_out) {
  KnowledgeGraph kg;
  const IngestSummary summary = ingest_triplets(triplets_file, kg);
  kg.save_snapshot(snapshot_out);
  std::cout << nlohmann::json{{"triplets", summary.triplets},
                              {"duplicates", summary.duplicates},
                              {"entities", kg.entities().size()},
                              {"snapshot", snapshot_out}}
                   .dump()
            << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-evolving knowledge-graph retrieval engine"};
  app.require_subcommand(1);

  // ingest
  std::string triplets_file, snapshot_path, snapshot_out;
  auto* ingest = app.add_subcommand("ingest", "Build a snapshot from a triplet file");
  ingest->add_option("--triplets", triplets_file, "Line-delimited triplet records")->required();
  ingest->add_option("--snapshot", snapshot_out, "Snapshot output path")->required();

  // run
  RunConfig run_config;
  std::optional<double> alpha_init;
  ProviderOptions run_providers;
  std::string train_file, report_dir, run_snapshot_out;
  auto* run = app.add_subcommand("run", "Closed-loop training over train queries");
  run->add_option("--snapshot", snapshot_path, "Input snapshot")->required();
  run->add_option("--train", train_file, "Train query file")->required();
  run->add_option("--snapshot-out", run_snapshot_out, "Final snapshot output path");
  run->add_option("--report-dir", report_dir, "Per-iteration report directory");
  add_run_flags(run, run_config, alpha_init);
  add_provider_flags(run, run_providers);

  // eval
  RunConfig eval_config;
  std::optional<double> eval_alpha_unused;
  ProviderOptions eval_providers;
  std::string test_file;
  auto* eval = app.add_subcommand("eval", "Evaluate a snapshot on test queries");
  eval->add_option("--snapshot", snapshot_path, "Input snapshot")->required();
  eval->add_option("--test", test_file, "Test query file")->required();
  eval->add_option("--n-entities", eval_config.top_entities, "Top-N query entities");
  eval->add_option("--m-paths", eval_config.top_paths, "Top-M paths per start entity");
  eval->add_option("--k-hop", eval_config.hops, "Subgraph extraction hops");
  add_provider_flags(eval, eval_providers);

  // synth
  SynthParams synth_params;
  std::string out_dir;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  synth->add_option("--chains", synth_params.chains, "Planted supporting chains");
  synth->add_option("--train-per-chain", synth_params.train_per_chain,
                    "Train queries per chain");
  synth->add_option("--distractors", synth_params.distractors, "Planted distractor triplets");
  synth->add_option("--outdated", synth_params.outdated, "Planted outdated triplets");
  synth->add_option("--entities", synth_params.background_entities, "Background entities");
  synth->add_option("--branching", synth_params.branching, "Background branching factor");
  synth->add_option("--seed", synth_params.seed, "RNG seed");
  synth->add_option("--out-dir", out_dir, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) return cmd_ingest(triplets_file, snapshot_out);

    if (*run) {
      run_config.alpha_init = alpha_init;
      KnowledgeGraph kg = KnowledgeGraph::load_snapshot(snapshot_path);
      Providers providers = build_providers(run_providers, run_config.prompt_token_budget);
      RunProviders rp{*providers.embedder, *providers.judge, *providers.generator,
                      providers.labeler,
                      providers.annotations ? &*providers.annotations : nullptr};
      auto train = load_queries(train_file);
      auto reports = run_training(kg, std::move(train), run_config, rp, report_dir);
      if (!run_snapshot_out.empty()) kg.save_snapshot(run_snapshot_out);
      for (const auto& r : reports) {
        std::cout << "iteration " << r.iteration << "  loss " << r.mean_loss << "  E[U] "
                  << r.mean_expected_utility << "  alpha " << r.alpha << "  train_acc "
                  << r.train_accuracy << "  problematic " << r.problematic_ratio << '\n';
      }
      return 0;
    }

    if (*eval) {
      KnowledgeGraph kg = KnowledgeGraph::load_snapshot(snapshot_path);
      Providers providers =
          build_providers(eval_providers, eval_config.prompt_token_budget, /*need_judge=*/false);
      auto test = load_queries(test_file);
      auto result = evaluate(kg, test, eval_config, *providers.embedder, *providers.generator);
      std::cout << nlohmann::json{{"acc", result.acc},
                                  {"em", result.em},
                                  {"f1", result.f1},
                                  {"alpha", kg.alpha()},
                                  {"queries", test.size()}}
                       .dump()
                << '\n';
      return 0;
    }

    if (*synth) {
      auto corpus = generate_synthetic(synth_params);
      write_corpus(corpus, out_dir);
      std::cout << nlohmann::json{{"triplets", corpus.triplets.size()},
                                  {"train_queries", corpus.train_queries.size()},
                                  {"test_queries", corpus.test_queries.size()},
                                  {"out_dir", out_dir}}
                       .dump()
                << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
