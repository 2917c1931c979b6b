#include <gtest/gtest.h>

#include "lirlab/loss/infonce.hpp"
#include "loss_support.hpp"

using namespace lirlab;
using namespace lirlab::loss;
using testing_support::code_of;
using testing_support::Big;
using testing_support::random_batch;
using testing_support::reference_infonce;

namespace {

struct Fd {
  double max_rel = 0.0;
  std::size_t coords = 0;
};

// Central differences on every raw coordinate against the analytic gradient.
Fd finite_difference_check(const Batch& batch, double h) {
  const auto grad = infonce_maxsim_grad(batch);
  Fd out;
  for (int side = 0; side < 2; ++side) {
    const auto& mats = side == 0 ? batch.queries : batch.targets;
    const auto& g = side == 0 ? grad.queries : grad.targets;
    for (std::size_t i = 0; i < mats.size(); ++i) {
      for (std::size_t c = 0; c < mats[i].values().size(); ++c) {
        auto eval = [&](double delta) {
          Batch b = batch;
          auto& target = side == 0 ? b.queries[i] : b.targets[i];
          std::vector<double> v(target.values().begin(), target.values().end());
          v[c] += delta;
          target = TokenMatrix64(target.tokens(), target.dim(), std::move(v));
          return infonce_maxsim(b);
        };
        const double fd = (eval(h) - eval(-h)) / (2 * h);
        const double an = g[i][c];
        const double rel = std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-7});
        out.max_rel = std::max(out.max_rel, rel);
        ++out.coords;
      }
    }
  }
  return out;
}

}  // namespace

TEST(InfoNce, SingleItemIsZero) {
  const auto b = random_batch(1, 1, 3, 4, 0.1);
  EXPECT_EQ(infonce_maxsim(b), 0.0);
  const auto g = infonce_maxsim_grad(b);
  for (double x : g.queries[0]) EXPECT_EQ(x, 0.0);
  for (double x : g.targets[0]) EXPECT_EQ(x, 0.0);
}

TEST(InfoNce, TwoByTwoClosedForm) {
  Batch b;
  b.tau = 1.0;
  b.queries = {TokenMatrix64::from_rows({{1, 0}}), TokenMatrix64::from_rows({{0, 1}})};
  b.targets = b.queries;
  const double expected = std::log(std::exp(1.0) / (std::exp(1.0) + 1.0));
  EXPECT_NEAR(expected, -0.313262, 1e-6);
  EXPECT_NEAR(infonce_maxsim(b), expected, 1e-12);
  const auto s = batch_scores(b);
  EXPECT_EQ(s.values, (std::vector<double>{1, 0, 0, 1}));
}

TEST(InfoNce, ShiftInvarianceAndSign) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + rng() % 7;
    ScoreMatrix s(n, n);
    for (auto& x : s.values) x = u(rng);
    const double tau = 0.05 + 0.5 * (u(rng) + 1);
    const double base = infonce_from_scores(s, tau);
    EXPECT_LE(base, 0.0);
    auto shifted = s;
    const double c = 3 * u(rng);
    for (auto& x : shifted.values) x += c;
    EXPECT_NEAR(infonce_from_scores(shifted, tau), base, 1e-9);
  }
  EXPECT_EQ(code_of([] { infonce_from_scores(ScoreMatrix(2, 3), 1.0); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { infonce_from_scores(ScoreMatrix(2, 2), 0.0); }), ErrorCode::InvalidArgument);
}

TEST(InfoNce, MatchesFiftyDigitReferenceAtTinyTemperature) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto b = random_batch(100 + seed, 4, 3, 5, 1e-6);
    const double got = infonce_maxsim(b);
    const Big ref = reference_infonce(b);
    ASSERT_TRUE(std::isfinite(got));
    EXPECT_LE(got, 0.0);
    const double r = ref.convert_to<double>();
    EXPECT_NEAR(got, r, 1e-6 * std::max(1.0, std::abs(r))) << "seed " << seed;
  }
  // Moderate temperature, tight agreement.
  const auto b = random_batch(7, 4, 2, 6, 0.3);
  EXPECT_NEAR(infonce_maxsim(b), reference_infonce(b).convert_to<double>(), 1e-13);
}

TEST(InfoNce, BatchValidation) {
  Batch b = random_batch(1, 3, 2, 4, 0.1);
  b.targets.pop_back();
  EXPECT_EQ(code_of([&] { infonce_maxsim(b); }), ErrorCode::InvalidArgument);
  Batch empty;
  EXPECT_EQ(code_of([&] { infonce_maxsim(empty); }), ErrorCode::InvalidArgument);
  Batch neg = random_batch(1, 2, 2, 4, -1.0);
  EXPECT_EQ(code_of([&] { infonce_maxsim(neg); }), ErrorCode::InvalidArgument);
  Batch ragged = random_batch(1, 2, 2, 4, 0.1);
  ragged.targets[1] = TokenMatrix64::from_rows({{1, 0, 0, 0}});
  EXPECT_EQ(code_of([&] { infonce_maxsim(ragged); }), ErrorCode::InvalidArgument);
}

TEST(InfoNceGrad, MatchesCentralDifferences) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto b = random_batch(1000 + seed, 4, 3, 8, 0.1);
    ASSERT_GT(testing_support::min_argmax_margin(b), 1e-6);
    const auto fd = finite_difference_check(b, 1e-5);
    EXPECT_EQ(fd.coords, 2u * 4 * 3 * 8);
    EXPECT_LE(fd.max_rel, 1e-4) << "seed " << seed;
  }
}

TEST(InfoNceGrad, UnitTemperatureAndUnevenShapes) {
  const auto b = random_batch(5, 3, 4, 5, 1.0);
  EXPECT_LE(finite_difference_check(b, 1e-5).max_rel, 1e-4);
}

TEST(InfoNceGrad, ValueAndGradAgree) {
  const auto b = random_batch(3, 5, 2, 6, 0.2);
  BatchGradient g;
  const double v = infonce_maxsim_value_and_grad(b, g, TiePolicy::reject);
  EXPECT_EQ(v, infonce_maxsim(b));
  const auto g2 = infonce_maxsim_grad(b);
  EXPECT_EQ(g.queries, g2.queries);
  EXPECT_EQ(g.targets, g2.targets);
}

TEST(InfoNceGrad, RadialDirectionHasNoGradient) {
  // L depends on raw tokens only through their directions.
  const auto b = random_batch(9, 3, 3, 4, 0.1);
  const auto g = infonce_maxsim_grad(b);
  for (std::size_t i = 0; i < b.size(); ++i) {
    for (std::size_t s = 0; s < 3; ++s) {
      double dot = 0;
      for (std::size_t k = 0; k < 4; ++k) dot += g.queries[i][s * 4 + k] * b.queries[i].row(s)[k];
      EXPECT_NEAR(dot, 0.0, 1e-12);
    }
  }
}

TEST(InfoNceGrad, DuplicatedTargetTokensAreATie) {
  Batch b = random_batch(4, 2, 2, 3, 0.1);
  const auto row = std::vector<double>(b.targets[1].row(0).begin(), b.targets[1].row(0).end());
  b.targets[1] = TokenMatrix64::from_rows({row, row});
  try {
    infonce_maxsim_grad(b);
    FAIL() << "expected TieDetected";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TieDetected);
    EXPECT_NE(std::string(e.what()).find("against target 1"), std::string::npos) << e.what();
  }
  EXPECT_NO_THROW(infonce_maxsim_grad(b, TiePolicy::first_index));
}
