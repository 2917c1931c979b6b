#include "lirlab/loss/infonce.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

#include <fmt/format.h>

#include "lirlab/maxsim.hpp"

namespace lirlab::loss {

void validate_batch(const Batch& batch) {
  if (batch.queries.empty()) raise(ErrorCode::InvalidArgument, "batch needs N >= 1");
  if (batch.queries.size() != batch.targets.size()) {
    raise(ErrorCode::InvalidArgument, "batch has " + std::to_string(batch.queries.size()) + " queries but " +
                                          std::to_string(batch.targets.size()) + " targets");
  }
  if (!(batch.tau > 0.0) || !std::isfinite(batch.tau)) raise(ErrorCode::InvalidArgument, "tau must be > 0");
  const auto p = batch.queries.front().tokens();
  const auto d = batch.queries.front().dim();
  for (std::size_t i = 0; i < batch.size(); ++i) {
    for (const auto* m : {&batch.queries[i], &batch.targets[i]}) {
      if (m->tokens() != p || m->dim() != d) raise(ErrorCode::InvalidArgument, "batch shapes are not uniform");
    }
  }
}

namespace {

std::vector<TokenMatrix64> normalized(const std::vector<TokenMatrix64>& ms) {
  std::vector<TokenMatrix64> out;
  out.reserve(ms.size());
  for (const auto& m : ms) out.push_back(normalize_tokens(m));
  return out;
}

double row_dot(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) dot += a[k] * b[k];
  return dot;
}

}  // namespace

ScoreMatrix batch_scores(const Batch& batch) {
  validate_batch(batch);
  const auto u = normalized(batch.queries);
  const auto v = normalized(batch.targets);
  ScoreMatrix s(u.size(), v.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    for (std::size_t j = 0; j < v.size(); ++j) s.at(i, j) = maxsim_brute(u[i], v[j]);
  }
  return s;
}

double infonce_from_scores(const ScoreMatrix& scores, double tau) {
  if (scores.rows == 0 || scores.rows != scores.cols) {
    raise(ErrorCode::InvalidArgument, "InfoNCE needs a non-empty square score matrix");
  }
  if (!(tau > 0.0)) raise(ErrorCode::InvalidArgument, "tau must be > 0");
  double total = 0.0;
  for (std::size_t i = 0; i < scores.rows; ++i) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < scores.cols; ++j) m = std::max(m, scores.at(i, j) / tau);
    double sum = 0.0;
    for (std::size_t j = 0; j < scores.cols; ++j) sum += std::exp(scores.at(i, j) / tau - m);
    const double term = (scores.at(i, i) / tau - m) - std::log(sum);
    total += std::min(term, 0.0);
  }
  return total / static_cast<double>(scores.rows);
}

double infonce_maxsim(const Batch& batch) { return infonce_from_scores(batch_scores(batch), batch.tau); }

double infonce_maxsim_value_and_grad(const Batch& batch, BatchGradient& grad, TiePolicy ties) {
  validate_batch(batch);
  const auto n = batch.size();
  const auto p = batch.queries.front().tokens();
  const auto d = batch.queries.front().dim();
  const auto u = normalized(batch.queries);
  const auto v = normalized(batch.targets);
  const double inv_p = 1.0 / static_cast<double>(p);

  // Inner argmax for every (i, j, s) and the resulting scores.
  std::vector<std::size_t> best(n * n * p);
  ScoreMatrix s(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double total = 0.0;
      for (std::size_t t = 0; t < p; ++t) {
        const auto ut = u[i].row(t);
        double top = -std::numeric_limits<double>::infinity();
        double second = -std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t r = 0; r < p; ++r) {
          const double dot = row_dot(ut, v[j].row(r));
          if (dot > top) {
            second = top;
            top = dot;
            arg = r;
          } else if (dot > second) {
            second = dot;
          }
        }
        if (ties == TiePolicy::reject && p > 1 && top - second <= kTieTolerance) {
          raise(ErrorCode::TieDetected,
                fmt::format("ambiguous argmax for query {} token {} against target {} (margin {:.3e})", i, t, j,
                            top - second));
        }
        best[(i * n + j) * p + t] = arg;
        total += top;
      }
      s.at(i, j) = total / static_cast<double>(p);
    }
  }

  const double tau = batch.tau;
  const double value = infonce_from_scores(s, tau);

  // dL/ds_ij = (delta_ij - softmax_ij) / (N tau)
  std::vector<double> coef(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) m = std::max(m, s.at(i, j) / tau);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) sum += std::exp(s.at(i, j) / tau - m);
    for (std::size_t j = 0; j < n; ++j) {
      const double prob = std::exp(s.at(i, j) / tau - m) / sum;
      coef[i * n + j] = ((i == j ? 1.0 : 0.0) - prob) / (static_cast<double>(n) * tau);
    }
  }

  // Gradients with respect to the normalized tokens.
  std::vector<std::vector<double>> gu(n, std::vector<double>(p * d, 0.0));
  std::vector<std::vector<double>> gv(n, std::vector<double>(p * d, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double c = coef[i * n + j] * inv_p;
      if (c == 0.0) continue;
      for (std::size_t t = 0; t < p; ++t) {
        const auto r = best[(i * n + j) * p + t];
        const auto ut = u[i].row(t);
        const auto vr = v[j].row(r);
        for (std::size_t k = 0; k < d; ++k) {
          gu[i][t * d + k] += c * vr[k];
          gv[j][r * d + k] += c * ut[k];
        }
      }
    }
  }

  // Chain through x -> x / |x|: (g - <g, x_hat> x_hat) / |x|.
  auto project = [&](const std::vector<TokenMatrix64>& raw, const std::vector<TokenMatrix64>& unit,
                     std::vector<std::vector<double>>& g) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t t = 0; t < p; ++t) {
        const auto xr = raw[i].row(t);
        const auto xh = unit[i].row(t);
        const double norm = std::sqrt(row_dot(xr, xr));
        std::span<double> gt(g[i].data() + t * d, d);
        const double radial = row_dot(gt, xh);
        for (std::size_t k = 0; k < d; ++k) gt[k] = (gt[k] - radial * xh[k]) / norm;
      }
    }
  };
  project(batch.queries, u, gu);
  project(batch.targets, v, gv);
  grad.queries = std::move(gu);
  grad.targets = std::move(gv);
  return value;
}

BatchGradient infonce_maxsim_grad(const Batch& batch, TiePolicy ties) {
  BatchGradient g;
  infonce_maxsim_value_and_grad(batch, g, ties);
  return g;
}

}  // namespace lirlab::loss
