#include <gtest/gtest.h>

#include "json.hpp"
#include "lirlab/loss/bounds.hpp"
#include "loss_support.hpp"

using namespace lirlab;
using namespace lirlab::loss;
using testing_support::Big;
using testing_support::random_batch;

namespace {

struct Thresholds {
  double p1 = 1e300;
  double p2 = -1e300;
};

Thresholds read_thresholds(const ScoreMatrix& s) {
  Thresholds t;
  for (std::size_t i = 0; i < s.rows; ++i) {
    for (std::size_t j = 0; j < s.cols; ++j) {
      if (i == j) {
        t.p1 = std::min(t.p1, s.at(i, j));
      } else {
        t.p2 = std::max(t.p2, s.at(i, j));
      }
    }
  }
  if (s.rows == 1) t.p2 = t.p1;
  return t;
}

}  // namespace

TEST(Bounds, PermutedBatchesSatisfyBothStatements) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto b = make_permuted_batch(128, 4, 16, 0.01, 0.1, seed);
    const auto r = verify_bounds(b);
    EXPECT_TRUE(r.assumption_holds);
    EXPECT_FALSE(r.outside_hypothesis);
    EXPECT_TRUE(r.proposition_ok);
    EXPECT_TRUE(r.corollary_ok);

    // Independent re-derivation of every reported number.
    const auto s = batch_scores(b);
    const auto th = read_thresholds(s);
    EXPECT_EQ(r.p1, th.p1);
    EXPECT_EQ(r.p2, th.p2);
    EXPECT_NEAR(r.loss_maxsim, infonce_from_scores(s, 0.1), 1e-12);
    std::vector<Assignment> sig;
    for (std::size_t i = 0; i < b.size(); ++i) sig.push_back(argmax_assignment(b.queries[i], b.targets[i]));
    EXPECT_NEAR(r.loss_standard, standard_infonce(b, sig), 1e-12);
    EXPECT_NEAR(r.gap, r.loss_standard - r.loss_maxsim, 1e-12);
    EXPECT_NEAR(r.bound, 127.0 * std::exp((th.p2 - th.p1) / 0.1), 1e-12 * r.bound);
    EXPECT_NEAR(r.log_bound, std::log(127.0) + (th.p2 - th.p1) / 0.1, 1e-12);
    EXPECT_LE(r.loss_maxsim, r.loss_standard + 1e-9);
    EXPECT_LE(r.gap, r.bound + 1e-9);
    EXPECT_GE(r.bound, 0.0);
  }
}

TEST(Bounds, PermutedBatchConstruction) {
  const auto b = make_permuted_batch(16, 4, 8, 0.01, 0.2, 3);
  EXPECT_EQ(b.size(), 16u);
  EXPECT_EQ(b.tau, 0.2);
  for (std::size_t i = 0; i < b.size(); ++i) {
    EXPECT_TRUE(b.queries[i].normalized());
    EXPECT_TRUE(b.targets[i].normalized());
    EXPECT_TRUE(argmax_assignment(b.queries[i], b.targets[i]).bijective);
  }
  const auto again = make_permuted_batch(16, 4, 8, 0.01, 0.2, 3);
  EXPECT_EQ(again.targets, b.targets);
}

TEST(Bounds, SingleItemIsDegenerate) {
  const auto r = verify_bounds(make_permuted_batch(1, 3, 4, 0.01, 0.1, 0));
  EXPECT_EQ(r.loss_maxsim, 0.0);
  EXPECT_EQ(r.loss_standard, 0.0);
  EXPECT_EQ(r.gap, 0.0);
  EXPECT_EQ(r.bound, 0.0);
  EXPECT_EQ(r.p1, r.p2);
  EXPECT_TRUE(r.proposition_ok && r.corollary_ok && r.assumption_holds);
}

TEST(Bounds, SingleTokenCollapsesToCosine) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto r = verify_bounds(random_batch(seed, 10, 1, 6, 0.1));
    EXPECT_TRUE(r.assumption_holds);
    EXPECT_LE(std::abs(r.loss_maxsim - r.loss_standard), 1e-12);
    EXPECT_LE(std::abs(r.gap), 1e-12);
  }
}

TEST(Bounds, NonBijectiveItemIsFlagged) {
  Batch b = random_batch(2, 3, 2, 4, 0.1);
  const auto row = std::vector<double>(b.targets[0].row(0).begin(), b.targets[0].row(0).end());
  b.targets[0] = TokenMatrix64::from_rows({row, row});
  const auto r = verify_bounds(b);
  EXPECT_FALSE(r.assumption_holds);
  EXPECT_TRUE(r.outside_hypothesis);
  // Domination holds for any bijection, so the lower bound still holds.
  EXPECT_TRUE(r.proposition_ok);
}

TEST(Bounds, TinyTemperatureMatchesFiftyDigitReference) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto b = make_permuted_batch(4, 3, 6, 0.05, 1e-6, 40 + seed);
    const auto r = verify_bounds(b);
    ASSERT_TRUE(std::isfinite(r.loss_maxsim));
    ASSERT_TRUE(std::isfinite(r.loss_standard));
    ASSERT_TRUE(std::isfinite(r.log_bound));
    std::vector<Assignment> sig;
    for (std::size_t i = 0; i < b.size(); ++i) sig.push_back(argmax_assignment(b.queries[i], b.targets[i]));
    const double ref_l = testing_support::reference_infonce(b).convert_to<double>();
    const double ref_ls =
        testing_support::big_infonce(testing_support::big_standard_scores(b, sig), b.tau).convert_to<double>();
    EXPECT_NEAR(r.loss_maxsim, ref_l, 1e-6 * std::max(1.0, std::abs(ref_l)));
    EXPECT_NEAR(r.loss_standard, ref_ls, 1e-6 * std::max(1.0, std::abs(ref_ls)));
    EXPECT_TRUE(r.proposition_ok);
    EXPECT_TRUE(r.corollary_ok);
    const auto j = nlohmann::json::parse(to_json(r));
    EXPECT_EQ(j["tau"].get<double>(), 1e-6);
  }
  // Random (non-permuted) targets give a very negative L that must stay finite.
  const auto r = verify_bounds(random_batch(77, 4, 3, 6, 1e-6));
  EXPECT_TRUE(std::isfinite(r.loss_maxsim));
  const double ref = testing_support::reference_infonce(random_batch(77, 4, 3, 6, 1e-6)).convert_to<double>();
  EXPECT_NEAR(r.loss_maxsim, ref, 1e-6 * std::max(1.0, std::abs(ref)));
}

TEST(Bounds, ReportJson) {
  const auto r = verify_bounds(make_permuted_batch(1, 2, 3, 0.0, 0.1, 0));
  const auto text = to_json(r);
  const auto j = nlohmann::ordered_json::parse(text);
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"n", "p", "d", "tau", "loss_maxsim", "loss_standard", "gap", "p1", "p2",
                                            "bound", "log_bound", "assumption_holds", "outside_hypothesis",
                                            "proposition_ok", "corollary_ok"}));
  EXPECT_TRUE(j["log_bound"].is_null());  // log 0
}

TEST(Bounds, ArgmaxOverCandidatesIgnoresPositiveRescaling) {
  const auto b = random_batch(12, 6, 3, 5, 0.1);
  const auto s = batch_scores(b);
  for (double c : {0.01, 0.5, 7.0}) {
    for (std::size_t i = 0; i < s.rows; ++i) {
      const auto row = s.row(i);
      std::vector<double> scaled(row.begin(), row.end());
      for (auto& x : scaled) x *= c;
      EXPECT_EQ(std::max_element(row.begin(), row.end()) - row.begin(),
                std::max_element(scaled.begin(), scaled.end()) - scaled.begin());
    }
  }
}
