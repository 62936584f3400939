#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "evokg/backprop.hpp"
#include "evokg/evolution.hpp"
#include "evokg/feedback.hpp"
#include "evokg/harness.hpp"
#include "evokg/metrics.hpp"
#include "evokg/synthetic.hpp"

namespace py = pybind11;
using namespace evokg;

namespace {

// Thin provider bundle so python callers can drive the offline loop
// without wiring the provider interfaces themselves.
struct OfflineRun {
  KnowledgeGraph kg;
  Annotations annotations;
  std::vector<Query> train_queries;
  std::vector<Query> test_queries;

  std::vector<IterationReport> train(const std::vector<Query>& queries,
                                     const RunConfig& config,
                                     const std::string& report_dir) {
    LocalHashEmbedder embedder;
    ScriptedJudge judge(annotations);
    TopPathGenerator generator;
    RunProviders providers{embedder, judge, generator, fallback_label, &annotations};
    return run_training(kg, queries, config, providers, report_dir);
  }

  metrics::EvalResult eval(const std::vector<Query>& queries, const RunConfig& config) {
    LocalHashEmbedder embedder;
    TopPathGenerator generator;
    return evaluate(kg, queries, config, embedder, generator);
  }
};

}  // namespace

PYBIND11_MODULE(_evokg, m) {
  m.doc() = "Self-evolving knowledge-graph retrieval engine";

  py::enum_<Origin>(m, "Origin")
      .value("base", Origin::base)
      .value("shortcut", Origin::shortcut);

  py::class_<Triplet>(m, "Triplet")
      .def_readonly("tid", &Triplet::tid)
      .def_readonly("head", &Triplet::head)
      .def_readonly("relation", &Triplet::relation)
      .def_readonly("tail", &Triplet::tail)
      .def_readonly("origin", &Triplet::origin)
      .def_readonly("created_iteration", &Triplet::created_iteration);

  py::class_<ScoreStats>(m, "ScoreStats")
      .def_readonly("mean", &ScoreStats::mean)
      .def_readonly("stddev", &ScoreStats::stddev);

  py::class_<KnowledgeGraph>(m, "KnowledgeGraph")
      .def(py::init<>())
      .def("add_triplet", &KnowledgeGraph::add_triplet, py::arg("head"), py::arg("relation"),
           py::arg("tail"), py::arg("origin") = Origin::base,
           py::arg("score") = std::nullopt)
      .def("triplet", &KnowledgeGraph::triplet, py::return_value_policy::copy)
      .def("score", &KnowledgeGraph::score)
      .def("set_score", &KnowledgeGraph::set_score)
      .def("chain_successors", &KnowledgeGraph::chain_successors)
      .def("contribution_stats", &KnowledgeGraph::contribution_stats)
      .def("size", &KnowledgeGraph::size)
      .def_property("alpha", &KnowledgeGraph::alpha, &KnowledgeGraph::set_alpha)
      .def_property_readonly("iteration", &KnowledgeGraph::iteration)
      .def("save_snapshot", &KnowledgeGraph::save_snapshot)
      .def_static("load_snapshot", &KnowledgeGraph::load_snapshot)
      .def("audit_indices", &KnowledgeGraph::audit_indices);

  py::class_<Query>(m, "Query")
      .def(py::init([](std::string id, std::string text, std::vector<std::string> answers) {
             Query q;
             q.id = std::move(id);
             q.text = std::move(text);
             q.answers = std::move(answers);
             return q;
           }),
           py::arg("id"), py::arg("text"), py::arg("answers") = std::vector<std::string>{})
      .def_readwrite("id", &Query::id)
      .def_readwrite("text", &Query::text)
      .def_readwrite("answers", &Query::answers);

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("top_entities", &RunConfig::top_entities)
      .def_readwrite("top_paths", &RunConfig::top_paths)
      .def_readwrite("hops", &RunConfig::hops)
      .def_readwrite("max_fusion_hop", &RunConfig::max_fusion_hop)
      .def_readwrite("eta", &RunConfig::eta)
      .def_readwrite("noise_rate", &RunConfig::noise_rate)
      .def_readwrite("iterations", &RunConfig::iterations)
      .def_readwrite("batch_size", &RunConfig::batch_size)
      .def_readwrite("seed", &RunConfig::seed);

  py::class_<IterationReport>(m, "IterationReport")
      .def_readonly("iteration", &IterationReport::iteration)
      .def_readonly("mean_loss", &IterationReport::mean_loss)
      .def_readonly("mean_expected_utility", &IterationReport::mean_expected_utility)
      .def_readonly("alpha", &IterationReport::alpha)
      .def_readonly("train_accuracy", &IterationReport::train_accuracy)
      .def_readonly("problematic_ratio", &IterationReport::problematic_ratio)
      .def_readonly("inserted_shortcuts", &IterationReport::inserted_shortcuts)
      .def_readonly("flagged_triplets", &IterationReport::flagged_triplets);

  py::class_<metrics::EvalResult>(m, "EvalResult")
      .def_readonly("acc", &metrics::EvalResult::acc)
      .def_readonly("em", &metrics::EvalResult::em)
      .def_readonly("f1", &metrics::EvalResult::f1);

  py::class_<SynthParams>(m, "SynthParams")
      .def(py::init<>())
      .def_readwrite("chains", &SynthParams::chains)
      .def_readwrite("train_per_chain", &SynthParams::train_per_chain)
      .def_readwrite("distractors", &SynthParams::distractors)
      .def_readwrite("outdated", &SynthParams::outdated)
      .def_readwrite("background_entities", &SynthParams::background_entities)
      .def_readwrite("branching", &SynthParams::branching)
      .def_readwrite("seed", &SynthParams::seed);

  py::class_<OfflineRun>(m, "OfflineRun")
      .def(py::init([](const SynthParams& params) {
             auto corpus = generate_synthetic(params);
             auto run = std::make_unique<OfflineRun>();
             for (const auto& t : corpus.triplets)
               run->kg.add_triplet(t.head, t.relation, t.tail);
             run->annotations = std::move(corpus.annotations);
             run->train_queries = std::move(corpus.train_queries);
             run->test_queries = std::move(corpus.test_queries);
             return run;
           }))
      .def_readonly("train_queries", &OfflineRun::train_queries)
      .def_readonly("test_queries", &OfflineRun::test_queries)
      .def_property_readonly("graph", [](OfflineRun& r) -> KnowledgeGraph& { return r.kg; },
                             py::return_value_policy::reference_internal)
      .def("train", &OfflineRun::train, py::arg("queries"), py::arg("config") = RunConfig{},
           py::arg("report_dir") = std::string{})
      .def("eval", &OfflineRun::eval, py::arg("queries"), py::arg("config") = RunConfig{});

  m.def("token_f1", &metrics::token_f1_pair, "Token-level multiset F1 between two texts");
  m.def("accuracy_contains", &metrics::accuracy_contains);
  m.def("exact_match", &metrics::exact_match);
  m.def("oracle_feedback", &oracle_feedback);
}
