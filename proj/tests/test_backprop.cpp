#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "evokg/backprop.hpp"
#include "evokg/graph.hpp"

using namespace evokg;

namespace {

QueryRecord make_record(const std::vector<std::vector<TripletId>>& paths,
                        const std::map<TripletId, std::pair<double, double>>& sr_sc,
                        const std::vector<double>& utilities, double alpha) {
  QueryRecord rec;
  rec.query_id = "q";
  rec.alpha = alpha;
  rec.utilities = utilities;
  for (const auto& tids : paths) {
    RankedPath rp;
    rp.path.start = "s";
    rp.path.triplets = tids;
    for (TripletId tid : tids) {
      PathTerm term;
      term.tid = tid;
      term.s_r = sr_sc.at(tid).first;
      term.s_c = sr_sc.at(tid).second;
      rp.terms.push_back(term);
    }
    rec.paths.push_back(rp);
  }
  recompute_forward(rec);
  return rec;
}

QueryRecord random_record(std::mt19937& rng) {
  std::uniform_real_distribution<double> score(0.05, 0.95);
  std::uniform_real_distribution<double> util(-1.0, 1.0);
  const int n_triplets = 3 + static_cast<int>(rng() % 8);
  std::map<TripletId, std::pair<double, double>> sr_sc;
  for (int t = 0; t < n_triplets; ++t)
    sr_sc[static_cast<TripletId>(t)] = {score(rng), score(rng)};
  const int n_paths = 2 + static_cast<int>(rng() % 9);
  std::vector<std::vector<TripletId>> paths;
  std::vector<double> utilities;
  for (int p = 0; p < n_paths; ++p) {
    const int len = 1 + static_cast<int>(rng() % std::min(4, n_triplets));
    std::set<TripletId> used;
    while (static_cast<int>(used.size()) < len)
      used.insert(static_cast<TripletId>(rng() % n_triplets));
    paths.emplace_back(used.begin(), used.end());
    utilities.push_back(util(rng));
  }
  return make_record(paths, sr_sc, utilities, score(rng));
}

// Central finite difference of the loss w.r.t. one triplet's s_c.
double fd_score(const QueryRecord& base, TripletId tid, double h) {
  double vals[2];
  for (int side = 0; side < 2; ++side) {
    QueryRecord rec = base;
    const double delta = side == 0 ? h : -h;
    for (auto& rp : rec.paths)
      for (auto& term : rp.terms)
        if (term.tid == tid) term.s_c += delta;
    recompute_forward(rec);
    vals[side] = loss(rec);
  }
  return (vals[0] - vals[1]) / (2.0 * h);
}

double fd_alpha(const QueryRecord& base, double h) {
  double vals[2];
  for (int side = 0; side < 2; ++side) {
    QueryRecord rec = base;
    rec.alpha += side == 0 ? h : -h;
    recompute_forward(rec);
    vals[side] = loss(rec);
  }
  return (vals[0] - vals[1]) / (2.0 * h);
}

bool close_rel(double a, double b, double rtol, double atol = 1e-9) {
  return std::abs(a - b) <= atol + rtol * std::max(std::abs(a), std::abs(b));
}

}  // namespace

TEST_CASE("expected_utility boundary and arithmetic cases") {
  std::map<TripletId, std::pair<double, double>> s{{0, {0.5, 0.5}}, {1, {0.5, 0.5}}};
  CHECK(expected_utility(make_record({{0}}, s, {1.0}, 0.5)) == doctest::Approx(1.0));
  CHECK(expected_utility(make_record({{0}}, s, {-1.0}, 0.5)) ==
        doctest::Approx(kExpectedUtilityFloor));
  CHECK(expected_utility(make_record({{0}, {1}}, s, {1.0, -1.0}, 0.5)) == doctest::Approx(0.5));
}

TEST_CASE("loss examples including the clamp bound") {
  std::map<TripletId, std::pair<double, double>> s{{0, {0.5, 0.5}}, {1, {0.5, 0.5}}};
  CHECK(loss(make_record({{0}}, s, {1.0}, 0.5)) == doctest::Approx(0.0));
  CHECK(loss(make_record({{0}, {1}}, s, {1.0, -1.0}, 0.5)) == doctest::Approx(std::log(2.0)));
  CHECK(loss(make_record({{0}}, s, {-1.0}, 0.5)) == doctest::Approx(6.0 * std::log(10.0)));
}

TEST_CASE("single retrieved path yields zero gradients") {
  std::map<TripletId, std::pair<double, double>> s{{0, {0.7, 0.3}}, {1, {0.2, 0.9}}};
  const auto rec = make_record({{0, 1}}, s, {0.4}, 0.6);
  const auto g = query_gradients(rec);
  for (const auto& [tid, grad] : g.d_score) CHECK(grad == doctest::Approx(0.0));
  CHECK(g.d_alpha == doctest::Approx(0.0));
}

TEST_CASE("worked two-path example: exact gradient is -0.5") {
  // Two disjoint single-triplet paths, P(t)=0.5 each, U=(1,-1), alpha=0.5.
  std::map<TripletId, std::pair<double, double>> s{{0, {0.5, 0.5}}, {1, {0.5, 0.5}}};
  const auto rec = make_record({{0}, {1}}, s, {1.0, -1.0}, 0.5);
  CHECK(rec.paths[0].priority == doctest::Approx(0.5));
  const auto g = query_gradients(rec);
  CHECK(g.d_score.at(0) == doctest::Approx(-0.5));
  CHECK(g.d_score.at(1) == doctest::Approx(0.5));
  CHECK(close_rel(g.d_score.at(0), fd_score(rec, 0, 1e-6), 1e-5));
  // S_r == S_c everywhere, so the alpha gradient vanishes.
  CHECK(g.d_alpha == doctest::Approx(0.0));
  CHECK(close_rel(g.d_alpha, fd_alpha(rec, 1e-6), 1e-5, 1e-6));
}

TEST_CASE("exact gradients match central finite differences on 120 instances") {
  std::mt19937 rng(1234);
  int checked = 0;
  for (int inst = 0; inst < 120; ++inst) {
    const QueryRecord rec = random_record(rng);
    if (expected_utility(rec) <= 2.0 * kExpectedUtilityFloor) continue;  // clamp kink
    const auto g = query_gradients(rec, GradientMode::exact);
    std::set<TripletId> tids;
    for (const auto& rp : rec.paths)
      for (const auto& term : rp.terms) tids.insert(term.tid);
    for (TripletId tid : tids) {
      const double analytic = g.d_score.count(tid) ? g.d_score.at(tid) : 0.0;
      CHECK(close_rel(analytic, fd_score(rec, tid, 1e-6), 1e-5, 1e-7));
    }
    CHECK(close_rel(g.d_alpha, fd_alpha(rec, 1e-6), 1e-5, 1e-7));
    ++checked;
  }
  CHECK(checked >= 100);
}

TEST_CASE("paper_literal mode differs from exact in general") {
  std::mt19937 rng(77);
  bool differs = false;
  for (int inst = 0; inst < 10 && !differs; ++inst) {
    const QueryRecord rec = random_record(rng);
    const auto ge = query_gradients(rec, GradientMode::exact);
    const auto gp = query_gradients(rec, GradientMode::paper_literal);
    for (const auto& [tid, grad] : ge.d_score)
      if (!close_rel(grad, gp.d_score.count(tid) ? gp.d_score.at(tid) : 0.0, 1e-6)) differs = true;
  }
  CHECK(differs);
}

TEST_CASE("gradient sign property on randomized instances") {
  std::mt19937 rng(555);
  int confirmed = 0;
  for (int inst = 0; inst < 200; ++inst) {
    const QueryRecord rec = random_record(rng);
    if (expected_utility(rec) <= 2.0 * kExpectedUtilityFloor) continue;
    double mean_u = 0.0;
    for (std::size_t i = 0; i < rec.paths.size(); ++i)
      mean_u += rec.paths[i].priority * rec.utilities[i];
    const auto g = query_gradients(rec);
    std::map<TripletId, std::pair<bool, bool>> above_below;
    for (std::size_t i = 0; i < rec.paths.size(); ++i)
      for (const auto& term : rec.paths[i].terms) {
        auto& flags = above_below[term.tid];
        if (rec.utilities[i] > mean_u + 1e-9) flags.first = true;
        if (rec.utilities[i] < mean_u - 1e-9) flags.second = true;
      }
    for (const auto& [tid, flags] : above_below) {
      if (flags.first && !flags.second) {
        CHECK(g.d_score.at(tid) < 0.0);
        ++confirmed;
      } else if (flags.second && !flags.first) {
        CHECK(g.d_score.at(tid) > 0.0);
        ++confirmed;
      }
    }
  }
  CHECK(confirmed > 100);
}

TEST_CASE("bounds hold on arbitrary instances") {
  std::mt19937 rng(303);
  for (int inst = 0; inst < 100; ++inst) {
    const QueryRecord rec = random_record(rng);
    const double e = expected_utility(rec);
    const double l = loss(rec);
    CHECK(e >= kExpectedUtilityFloor);
    CHECK(e <= 1.0);
    CHECK(l >= 0.0);
    CHECK(l <= -std::log(kExpectedUtilityFloor) + 1e-12);
  }
}

TEST_CASE("query_gradients rejects an empty path list") {
  QueryRecord rec;
  rec.query_id = "q";
  CHECK_THROWS_AS(query_gradients(rec), std::invalid_argument);
}

TEST_CASE("accumulate_gradients sums per triplet and averages loss") {
  std::map<TripletId, std::pair<double, double>> s{{0, {0.5, 0.5}}, {1, {0.5, 0.5}}};
  const auto rec = make_record({{0}, {1}}, s, {1.0, -1.0}, 0.5);
  const auto single = query_gradients(rec);
  const auto doubled = accumulate_gradients({rec, rec});
  CHECK(doubled.queries == 2);
  CHECK(doubled.d_score.at(0) == doctest::Approx(2.0 * single.d_score.at(0)));
  CHECK(doubled.d_alpha == doctest::Approx(2.0 * single.d_alpha));
  CHECK(doubled.loss == doctest::Approx(single.loss));
  CHECK(doubled.expected == doctest::Approx(single.expected));
}

TEST_CASE("accumulation is deterministic across repeated evaluation") {
  std::mt19937 rng(8080);
  std::vector<QueryRecord> batch;
  for (int i = 0; i < 12; ++i) batch.push_back(random_record(rng));
  const auto a = accumulate_gradients(batch);
  const auto b = accumulate_gradients(batch);
  CHECK(a.d_alpha == b.d_alpha);
  CHECK(a.loss == b.loss);
  REQUIRE(a.d_score.size() == b.d_score.size());
  for (const auto& [tid, grad] : a.d_score) CHECK(grad == b.d_score.at(tid));
}

TEST_CASE("apply_updates performs one clamped descent step") {
  KnowledgeGraph kg;
  const TripletId t0 = kg.add_triplet("a", "r", "b");
  const TripletId t1 = kg.add_triplet("b", "r", "c");
  const TripletId t2 = kg.add_triplet("c", "r", "d");
  kg.set_score(t0, 0.5);
  kg.set_score(t1, 0.95);
  kg.set_score(t2, 0.42);
  kg.set_alpha(0.5);
  GradientReport g;
  g.d_score[t0] = -0.5;
  g.d_score[t1] = -0.5;
  g.d_alpha = -0.4;
  apply_updates(kg, g, 0.5);
  CHECK(kg.score(t0) == doctest::Approx(0.75));
  CHECK(kg.score(t1) == doctest::Approx(1.0));  // clamped
  CHECK(kg.score(t2) == doctest::Approx(0.42));  // zero gradient: unchanged
  CHECK(kg.alpha() == doctest::Approx(0.7));
}

TEST_CASE("apply_updates aborts on non-finite gradients without touching state") {
  KnowledgeGraph kg;
  const TripletId t0 = kg.add_triplet("a", "r", "b");
  kg.set_score(t0, 0.6);
  GradientReport g;
  g.d_score[t0] = std::nan("");
  CHECK_THROWS(apply_updates(kg, g, 0.5));
  CHECK(kg.score(t0) == doctest::Approx(0.6));
  g.d_score[t0] = 0.0;
  g.d_alpha = std::numeric_limits<double>::infinity();
  CHECK_THROWS(apply_updates(kg, g, 0.5));
  CHECK(kg.alpha() == doctest::Approx(0.5));
}

TEST_CASE("one small exact step never increases the frozen-batch loss") {
  std::mt19937 rng(999);
  for (int inst = 0; inst < 40; ++inst) {
    QueryRecord rec = random_record(rng);
    if (expected_utility(rec) <= 2.0 * kExpectedUtilityFloor) continue;
    const double before = loss(rec);
    const auto g = query_gradients(rec);
    bool descended = false;
    for (double eta : {0.5, 0.25, 0.125}) {
      QueryRecord stepped = rec;
      for (auto& rp : stepped.paths)
        for (auto& term : rp.terms) {
          const double grad = g.d_score.count(term.tid) ? g.d_score.at(term.tid) : 0.0;
          term.s_c = std::clamp(term.s_c - eta * grad, kScoreFloor, 1.0);
        }
      stepped.alpha = std::clamp(stepped.alpha - eta * g.d_alpha, 0.0, 1.0);
      recompute_forward(stepped);
      if (loss(stepped) <= before + 1e-12) {
        descended = true;
        break;
      }
    }
    CHECK(descended);
  }
}
