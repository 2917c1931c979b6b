#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lirlab/loss/assignment.hpp"
#include "lirlab/loss/infonce.hpp"

namespace lirlab::loss {

/// Slack allowed when checking the lower bound and the gap bound.
inline constexpr double kBoundSlack = 1e-9;

struct BoundReport {
  std::size_t n = 0;
  std::size_t p = 0;
  std::size_t d = 0;
  double tau = 0.0;
  double loss_maxsim = 0.0;    // L, <= 0
  double loss_standard = 0.0;  // L^s
  double gap = 0.0;            // L^s - L
  double p1 = 0.0;             // min_i s_ii
  double p2 = 0.0;             // max_{i != j} s_ij, p1 when N = 1
  double bound = 0.0;          // (N-1) exp((p2 - p1) / tau), may be +inf
  double log_bound = 0.0;      // log(N-1) + (p2 - p1) / tau, -inf when N = 1
  bool assumption_holds = false;  // every per-item argmax map is a bijection
  /// L^s used a max-weight bijection for some item because its argmax map
  /// was not bijective; the verdicts are then outside the hypothesis.
  bool outside_hypothesis = false;
  bool proposition_ok = false;  // L <= L^s + slack
  bool corollary_ok = false;    // gap <= bound + slack
};

/// Evaluates both losses on one batch, reading p1 and p2 off the instance.
BoundReport verify_bounds(const Batch& batch);

/// U: seeded random unit tokens. V_i: a seeded permutation of U_i's tokens
/// plus noise * N(0, I), renormalized, so the argmax map is bijective for
/// small noise.
Batch make_permuted_batch(std::size_t n, std::size_t p, std::size_t d, double noise, double tau,
                          std::uint64_t seed);

/// Same construction on given query token sets.
Batch make_permuted_batch(std::vector<TokenMatrix64> queries, double noise, double tau, std::uint64_t seed);

/// JSON object with every report field; non-finite numbers become null.
std::string to_json(const BoundReport& report);

}  // namespace lirlab::loss
