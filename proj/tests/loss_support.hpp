#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <random>

#include "lirlab/loss/assignment.hpp"
#include "lirlab/loss/infonce.hpp"
#include "support.hpp"

namespace testing_support {

/// Batch of independent random tokens with raw (unnormalized) rows, so the
/// gradient check exercises the normalization chain.
inline lirlab::loss::Batch random_batch(std::uint64_t seed, std::size_t n, std::size_t p, std::size_t d, double tau) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> scale(0.5, 2.0);
  lirlab::loss::Batch b;
  b.tau = tau;
  for (auto* side : {&b.queries, &b.targets}) {
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> v(p * d);
      for (std::size_t s = 0; s < p; ++s) {
        const double k = scale(rng);
        for (std::size_t c = 0; c < d; ++c) v[s * d + c] = k * g(rng);
      }
      side->emplace_back(p, d, std::move(v));
    }
  }
  return b;
}

/// Smallest gap between the best and second-best inner product over every
/// (i, j, s) inner max; zero-gap batches are not differentiable.
inline double min_argmax_margin(const lirlab::loss::Batch& b) {
  double margin = 1e300;
  for (const auto& u_raw : b.queries) {
    const auto u = lirlab::normalize_tokens(u_raw);
    for (const auto& v_raw : b.targets) {
      const auto v = lirlab::normalize_tokens(v_raw);
      for (std::size_t s = 0; s < u.tokens(); ++s) {
        double best = -2, second = -2;
        for (std::size_t r = 0; r < v.tokens(); ++r) {
          double dot = 0;
          for (std::size_t k = 0; k < u.dim(); ++k) dot += u.row(s)[k] * v.row(r)[k];
          if (dot > best) {
            second = best;
            best = dot;
          } else if (dot > second) {
            second = dot;
          }
        }
        if (v.tokens() > 1) margin = std::min(margin, best - second);
      }
    }
  }
  return margin;
}

using Big = boost::multiprecision::cpp_bin_float_50;

/// Cosine of two raw token rows in 50 significant digits.
inline Big big_cosine(std::span<const double> a, std::span<const double> b) {
  Big na = 0, nb = 0, dot = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    na += Big(a[k]) * Big(a[k]);
    nb += Big(b[k]) * Big(b[k]);
    dot += Big(a[k]) * Big(b[k]);
  }
  return dot / sqrt(na * nb);
}

/// InfoNCE of a score table, term by term without max-shifting.
inline Big big_infonce(const std::vector<std::vector<Big>>& s, double tau) {
  const std::size_t n = s.size();
  Big sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    Big z = 0;
    for (std::size_t j = 0; j < n; ++j) z += exp(s[i][j] / Big(tau));
    sum += s[i][i] / Big(tau) - log(z);
  }
  return sum / Big(n);
}

/// MaxSim scores of a batch in 50 digits.
inline std::vector<std::vector<Big>> big_maxsim_scores(const lirlab::loss::Batch& b) {
  const std::size_t n = b.size();
  std::vector<std::vector<Big>> s(n, std::vector<Big>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto& u = b.queries[i];
      const auto& v = b.targets[j];
      Big total = 0;
      for (std::size_t a = 0; a < u.tokens(); ++a) {
        Big best = -10;
        for (std::size_t r = 0; r < v.tokens(); ++r) best = std::max(best, big_cosine(u.row(a), v.row(r)));
        total += best;
      }
      s[i][j] = total / Big(u.tokens());
    }
  }
  return s;
}

/// Scores pairing token s of query i with token sigma_i(s) of every target.
inline std::vector<std::vector<Big>> big_standard_scores(const lirlab::loss::Batch& b,
                                                         const std::vector<lirlab::loss::Assignment>& sigmas) {
  const std::size_t n = b.size();
  std::vector<std::vector<Big>> s(n, std::vector<Big>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      Big total = 0;
      for (std::size_t a = 0; a < b.queries[i].tokens(); ++a) {
        total += big_cosine(b.queries[i].row(a), b.targets[j].row(sigmas[i].map[a]));
      }
      s[i][j] = total / Big(b.queries[i].tokens());
    }
  }
  return s;
}

inline Big reference_infonce(const lirlab::loss::Batch& b) { return big_infonce(big_maxsim_scores(b), b.tau); }

}  // namespace testing_support
