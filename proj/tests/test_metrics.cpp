#include <gtest/gtest.h>

#include <numeric>
#include <set>

#include "json.hpp"
#include "lirlab/metrics.hpp"
#include "support.hpp"

using namespace lirlab;
using namespace lirlab::metrics;
using testing_support::code_of;

namespace {

// Ranking over the given ids in order, with strictly decreasing scores.
RankedList ranking(const std::string& qid, const std::vector<std::string>& ids) {
  RankedList r{qid, {}};
  for (std::size_t i = 0; i < ids.size(); ++i) {
    r.entries.push_back({i, ids[i], 1.0 - 0.01 * static_cast<double>(i)});
  }
  return r;
}

std::vector<std::string> pool(std::size_t n, const std::string& prefix = "c") {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back(prefix + std::to_string(i));
  return ids;
}

// Ranking of size n with `target` placed at 1-based `rank`.
RankedList with_target_at(const std::string& qid, const std::string& target, std::size_t rank, std::size_t n) {
  auto ids = pool(n - 1);
  ids.insert(ids.begin() + static_cast<std::ptrdiff_t>(rank - 1), target);
  return ranking(qid, ids);
}

// Naive per-query metrics used as oracles.
double oracle_recall(const std::vector<std::string>& order, const std::set<std::string>& rel, std::size_t k) {
  for (std::size_t r = 0; r < std::min(k, order.size()); ++r) {
    if (rel.count(order[r])) return 1.0;
  }
  return 0.0;
}

double oracle_ap(const std::vector<std::string>& order, const std::set<std::string>& rel, std::size_t k) {
  double hits = 0, sum = 0;
  for (std::size_t r = 0; r < std::min(k, order.size()); ++r) {
    if (rel.count(order[r])) {
      hits += 1;
      sum += hits / static_cast<double>(r + 1);
    }
  }
  return sum / static_cast<double>(std::min(k, rel.size()));
}

}  // namespace

TEST(Recall, SingleQueryCases) {
  const EvalAnnotation ann{"q", {"t"}, std::nullopt};
  EXPECT_EQ(recall_at_k(with_target_at("q", "t", 1, 20), ann, 1), 1.0);
  EXPECT_EQ(recall_at_k(with_target_at("q", "t", 11, 20), ann, 10), 0.0);
  EXPECT_EQ(recall_at_k(with_target_at("q", "t", 10, 20), ann, 10), 1.0);
}

TEST(Recall, ThreeQueryAverage) {
  std::map<std::string, RankedList> run;
  std::vector<EvalAnnotation> anns;
  const std::size_t ranks[] = {1, 7, 30};
  for (int i = 0; i < 3; ++i) {
    const auto q = "q" + std::to_string(i);
    run[q] = with_target_at(q, "t", ranks[i], 40);
    anns.push_back({q, {"t"}, std::nullopt});
  }
  const auto rep = evaluate(run, anns, {10});
  EXPECT_NEAR(rep.recall_at.at(10), 2.0 / 3.0, 1e-12);
  EXPECT_EQ(rep.query_count, 3u);
}

TEST(SubsetRecall, RestrictionChangesRank) {
  // Target 4th overall, first among the subset members.
  const auto r = ranking("q", {"x1", "x2", "x3", "t", "s1", "s2", "s3", "s4", "s5"});
  const EvalAnnotation ann{"q", {"t"}, std::set<std::string>{"t", "s1", "s2", "s3", "s4", "s5"}};
  EXPECT_EQ(recall_subset_at_k(r, ann, 1), 1.0);
  EXPECT_EQ(recall_at_k(r, ann, 1), 0.0);

  const auto last = ranking("q", {"s1", "s2", "s3", "s4", "s5", "t"});
  EXPECT_EQ(recall_subset_at_k(last, ann, 3), 0.0);
}

TEST(SubsetRecall, MissingSubsetErrors) {
  const auto r = ranking("q", {"a", "t"});
  EXPECT_EQ(code_of([&] { recall_subset_at_k(r, {"q", {"t"}, std::nullopt}, 1); }), ErrorCode::MissingSubset);
  EXPECT_EQ(code_of([&] { recall_subset_at_k(r, {"q", {"t"}, std::set<std::string>{"t", "zz"}}, 1); }),
            ErrorCode::MissingSubset);
}

TEST(SubsetRecall, FullPoolSubsetEqualsRecall) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 100; ++t) {
    auto ids = pool(1 + rng() % 20);
    std::shuffle(ids.begin(), ids.end(), rng);
    const auto r = ranking("q", ids);
    const EvalAnnotation ann{"q", {ids[rng() % ids.size()]}, std::set<std::string>(ids.begin(), ids.end())};
    for (std::size_t k = 1; k <= ids.size() + 1; ++k) EXPECT_EQ(recall_subset_at_k(r, ann, k), recall_at_k(r, ann, k));
  }
}

TEST(SubsetRecall, MatchesResortOracle) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 200; ++t) {
    const auto ids = pool(6 + rng() % 14);
    // Random scores with ties, ranked by (score desc, id asc).
    std::vector<double> scores(ids.size());
    for (auto& s : scores) s = static_cast<double>(rng() % 5);
    std::vector<std::size_t> order(ids.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) {
      return scores[a] != scores[b] ? scores[a] > scores[b] : ids[a] < ids[b];
    });
    RankedList r{"q", {}};
    for (auto i : order) r.entries.push_back({i, ids[i], scores[i]});

    std::set<std::string> subset;
    while (subset.size() < 4) subset.insert(ids[rng() % ids.size()]);
    const std::string target = *std::next(subset.begin(), static_cast<long>(rng() % subset.size()));
    const EvalAnnotation ann{"q", {target}, subset};

    std::vector<std::size_t> sub_idx;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (subset.count(ids[i])) sub_idx.push_back(i);
    }
    std::sort(sub_idx.begin(), sub_idx.end(), [&](auto a, auto b) {
      return scores[a] != scores[b] ? scores[a] > scores[b] : ids[a] < ids[b];
    });
    std::vector<std::string> sub_order;
    for (auto i : sub_idx) sub_order.push_back(ids[i]);
    for (std::size_t k = 1; k <= 4; ++k) EXPECT_EQ(recall_subset_at_k(r, ann, k), oracle_recall(sub_order, {target}, k));
  }
}

TEST(AveragePrecision, WorkedExamples) {
  const auto r = ranking("q", {"a", "x", "b", "y", "z", "w"});
  const EvalAnnotation ann{"q", {"a", "b"}, std::nullopt};
  EXPECT_NEAR(average_precision_at_k(r, ann, 5), 0.5 * (1.0 + 2.0 / 3.0), 1e-12);
  EXPECT_NEAR(average_precision_at_k(r, ann, 5), 0.833333, 1e-6);
  const EvalAnnotation first{"q", {"a"}, std::nullopt};
  for (std::size_t k : {1, 2, 5, 50}) EXPECT_EQ(average_precision_at_k(r, first, k), 1.0);
  const EvalAnnotation none{"q", {"y"}, std::nullopt};
  EXPECT_EQ(average_precision_at_k(r, none, 3), 0.0);
}

TEST(AveragePrecision, MatchesNaiveOracle) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 300; ++t) {
    auto ids = pool(1 + rng() % 20);
    std::shuffle(ids.begin(), ids.end(), rng);
    std::set<std::string> rel;
    const std::size_t nrel = 1 + rng() % std::min<std::size_t>(5, ids.size());
    while (rel.size() < nrel) rel.insert(ids[rng() % ids.size()]);
    const auto r = ranking("q", ids);
    const EvalAnnotation ann{"q", rel, std::nullopt};
    for (std::size_t k = 1; k <= ids.size() + 2; ++k) {
      EXPECT_NEAR(average_precision_at_k(r, ann, k), oracle_ap(ids, rel, k), 1e-15);
      EXPECT_EQ(recall_at_k(r, ann, k), oracle_recall(ids, rel, k));
    }
  }
}

TEST(Evaluate, TwoQueryHandComputation) {
  std::map<std::string, RankedList> run{
      {"q1", ranking("q1", {"a", "b", "c", "d", "e", "f"})},
      {"q2", ranking("q2", {"f", "e", "d", "c", "b", "a"})},
  };
  std::vector<EvalAnnotation> anns{
      {"q2", {"c", "a"}, std::set<std::string>{"a", "c", "d"}},
      {"q1", {"b"}, std::set<std::string>{"b", "c", "e"}},
  };
  const auto rep = evaluate(run, anns, {1, 5}, std::vector<std::size_t>{1, 2});
  // q1: b at 2 (subset rank 1). q2: c at 4, a at 6 (subset order d, c, a).
  EXPECT_EQ(rep.recall_at.at(1), 0.0);
  EXPECT_EQ(rep.recall_at.at(5), 1.0);
  EXPECT_EQ(rep.recall_subset_at.at(1), 0.5);
  EXPECT_EQ(rep.recall_subset_at.at(2), 1.0);
  EXPECT_NEAR(rep.map_at.at(1), 0.0, 1e-15);
  // AP@5: q1 = (1/2)/1 = 0.5, q2 = (1/4)/2 = 0.125.
  EXPECT_NEAR(rep.map_at.at(5), (0.5 + 0.125) / 2, 1e-15);
  ASSERT_TRUE(rep.avg_r5_rsub1.has_value());
  EXPECT_NEAR(*rep.avg_r5_rsub1, (1.0 + 0.5) / 2, 1e-15);

  const auto j = nlohmann::json::parse(to_json(rep));
  EXPECT_EQ(j["query_count"], 2);
  EXPECT_EQ(j["recall_subset_at"]["2"], 1.0);
  const auto text = to_json(rep);
  EXPECT_NE(text.find("\"5\": 0.312500"), std::string::npos) << text;
  EXPECT_NE(text.find("\"avg_r5_rsub1\": 0.750000"), std::string::npos) << text;
}

TEST(Evaluate, EdgeCases) {
  std::map<std::string, RankedList> run{{"q", ranking("q", {"a", "b"})}};
  const std::vector<EvalAnnotation> anns{{"q", {"a"}, std::nullopt}};
  const auto empty = evaluate(run, anns, {});
  EXPECT_TRUE(empty.recall_at.empty());
  EXPECT_TRUE(empty.map_at.empty());
  EXPECT_EQ(empty.query_count, 1u);
  EXPECT_FALSE(empty.avg_r5_rsub1.has_value());
  const auto one = evaluate(run, anns, {1});
  EXPECT_EQ(one.recall_at.size(), 1u);
  EXPECT_EQ(one.map_at.size(), 1u);
  EXPECT_TRUE(one.recall_subset_at.empty());

  const std::vector<EvalAnnotation> missing{{"other", {"a"}, std::nullopt}};
  EXPECT_EQ(code_of([&] { evaluate(run, missing, {1}); }), ErrorCode::MissingQuery);
  std::map<std::string, RankedList> run2 = run;
  run2["r"] = ranking("r", {"a", "b"});
  const std::vector<EvalAnnotation> mixed{{"q", {"a"}, std::set<std::string>{"a"}}, {"r", {"a"}, std::nullopt}};
  EXPECT_EQ(code_of([&] { evaluate(run2, mixed, {1}); }), ErrorCode::MissingSubset);
}

TEST(Evaluate, RecallIsMonotoneInK) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 100; ++t) {
    std::map<std::string, RankedList> run;
    std::vector<EvalAnnotation> anns;
    const auto n = 2 + rng() % 19;
    for (int q = 0; q < 4; ++q) {
      auto ids = pool(n);
      std::shuffle(ids.begin(), ids.end(), rng);
      const auto qid = "q" + std::to_string(q);
      run[qid] = ranking(qid, ids);
      std::set<std::string> rel;
      const auto nrel = 1 + rng() % std::min<std::size_t>(4, n);
      while (rel.size() < nrel) rel.insert(ids[rng() % n]);
      std::set<std::string> subset(rel.begin(), rel.end());
      subset.insert(ids[rng() % n]);
      anns.push_back({qid, rel, subset});
    }
    std::vector<std::size_t> ks(n + 1);
    std::iota(ks.begin(), ks.end(), 1);
    const auto rep = evaluate(run, anns, ks);
    for (std::size_t k = 2; k <= n + 1; ++k) {
      EXPECT_GE(rep.recall_at.at(k), rep.recall_at.at(k - 1));
      EXPECT_GE(rep.recall_subset_at.at(k), rep.recall_subset_at.at(k - 1));
    }
  }
}

TEST(Evaluate, MapIsMonotoneOnceKCoversTheRelevantSet) {
  // With 1/min(K, |relevant|) normalisation, AP can drop while K < |relevant|
  // (one hit at rank 1 of three relevant: AP@1 = 1, AP@2 = 1/2); beyond that the
  // denominator is fixed and AP can only grow.
  const auto r = ranking("q", {"a", "x", "y", "b", "c"});
  const EvalAnnotation ann{"q", {"a", "b", "c"}, std::nullopt};
  EXPECT_EQ(average_precision_at_k(r, ann, 1), 1.0);
  EXPECT_EQ(average_precision_at_k(r, ann, 2), 0.5);
  for (std::size_t k = 4; k <= 6; ++k) {
    EXPECT_GE(average_precision_at_k(r, ann, k), average_precision_at_k(r, ann, k - 1));
  }
}

TEST(Annotations, LoadAndValidate) {
  testing_support::TempDir dir;
  testing_support::write_file(dir / "a.jsonl",
                              "{\"query_id\":\"q1\",\"relevant_ids\":[\"a\"]}\n\n"
                              "{\"query_id\":\"q2\",\"relevant_ids\":[\"b\",\"c\"],\"subset_ids\":[\"b\",\"d\"]}\n");
  const auto anns = load_annotations(dir / "a.jsonl");
  ASSERT_EQ(anns.size(), 2u);
  EXPECT_FALSE(anns[0].subset_ids.has_value());
  EXPECT_EQ(anns[1].relevant_ids, (std::set<std::string>{"b", "c"}));
  EXPECT_EQ(anns[1].subset_ids->size(), 2u);

  testing_support::write_file(dir / "bad.jsonl", "{\"query_id\":\"q1\"}\n");
  EXPECT_EQ(code_of([&] { load_annotations(dir / "bad.jsonl"); }), ErrorCode::FormatError);
  testing_support::write_file(dir / "bad2.jsonl", "{\"query_id\":\"q1\",\"relevant_ids\":[]}\n");
  EXPECT_EQ(code_of([&] { load_annotations(dir / "bad2.jsonl"); }), ErrorCode::FormatError);
  testing_support::write_file(dir / "bad3.jsonl",
                              "{\"query_id\":\"q1\",\"relevant_ids\":[\"a\"],\"subset_ids\":[\"z\"]}\n");
  EXPECT_EQ(code_of([&] { load_annotations(dir / "bad3.jsonl"); }), ErrorCode::FormatError);
  EXPECT_EQ(code_of([&] { load_annotations(dir / "none.jsonl"); }), ErrorCode::IoError);
}
