#include "lirlab/loss/assignment.hpp"

#include <limits>

namespace lirlab::loss {

namespace {

double row_dot(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) dot += a[k] * b[k];
  return dot;
}

void check_pair(const TokenMatrix64& u, const TokenMatrix64& v) {
  if (u.tokens() != v.tokens()) raise(ErrorCode::InvalidArgument, "assignment needs equal token counts");
  if (u.dim() != v.dim()) raise(ErrorCode::DimensionMismatch, "assignment operands differ in d");
}

}  // namespace

bool is_bijective(std::span<const std::size_t> map, std::size_t p) {
  if (map.size() != p) return false;
  std::vector<bool> seen(p, false);
  for (auto r : map) {
    if (r >= p || seen[r]) return false;
    seen[r] = true;
  }
  return true;
}

Assignment argmax_assignment(const TokenMatrix64& u_raw, const TokenMatrix64& v_raw) {
  check_pair(u_raw, v_raw);
  const auto u = normalize_tokens(u_raw);
  const auto v = normalize_tokens(v_raw);
  const auto p = u.tokens();
  Assignment a;
  a.map.resize(p);
  for (std::size_t s = 0; s < p; ++s) {
    std::vector<double> dots(p);
    std::size_t arg = 0;
    for (std::size_t r = 0; r < p; ++r) {
      dots[r] = row_dot(u.row(s), v.row(r));
      if (dots[r] > dots[arg] + kTieTolerance) arg = r;
    }
    for (std::size_t r = 0; r < p; ++r) {
      if (r != arg && dots[r] >= dots[arg] - kTieTolerance) a.has_ties = true;
    }
    a.map[s] = arg;
  }
  a.bijective = is_bijective(a.map, p);
  return a;
}

Assignment max_weight_bijection(const TokenMatrix64& u_raw, const TokenMatrix64& v_raw) {
  check_pair(u_raw, v_raw);
  const auto u = normalize_tokens(u_raw);
  const auto v = normalize_tokens(v_raw);
  const auto p = u.tokens();

  // Hungarian method (potentials form) minimizing cost = -<u_s, v_r>; 1-based
  // internal indexing with row/column 0 as the virtual start.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> pot_row(p + 1, 0.0), pot_col(p + 1, 0.0);
  std::vector<std::size_t> match(p + 1, 0), way(p + 1, 0);
  for (std::size_t row = 1; row <= p; ++row) {
    match[0] = row;
    std::size_t col0 = 0;
    std::vector<double> minv(p + 1, inf);
    std::vector<bool> used(p + 1, false);
    do {
      used[col0] = true;
      const std::size_t r0 = match[col0];
      double delta = inf;
      std::size_t col1 = 0;
      for (std::size_t c = 1; c <= p; ++c) {
        if (used[c]) continue;
        const double cost = -row_dot(u.row(r0 - 1), v.row(c - 1));
        const double cur = cost - pot_row[r0] - pot_col[c];
        if (cur < minv[c]) {
          minv[c] = cur;
          way[c] = col0;
        }
        if (minv[c] < delta) {
          delta = minv[c];
          col1 = c;
        }
      }
      for (std::size_t c = 0; c <= p; ++c) {
        if (used[c]) {
          pot_row[match[c]] += delta;
          pot_col[c] -= delta;
        } else {
          minv[c] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const std::size_t col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }

  Assignment a;
  a.map.resize(p);
  for (std::size_t c = 1; c <= p; ++c) a.map[match[c] - 1] = c - 1;
  a.bijective = true;
  return a;
}

ScoreMatrix standard_scores(const Batch& batch, std::span<const Assignment> sigmas) {
  validate_batch(batch);
  const auto n = batch.size();
  const auto p = batch.queries.front().tokens();
  if (sigmas.size() != n) raise(ErrorCode::InvalidArgument, "need one sigma per batch item");
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_bijective(sigmas[i].map, p)) {
      raise(ErrorCode::NonBijectiveSigma, "sigma for item " + std::to_string(i) + " is not a bijection");
    }
  }
  std::vector<TokenMatrix64> u, v;
  for (const auto& m : batch.queries) u.push_back(normalize_tokens(m));
  for (const auto& m : batch.targets) v.push_back(normalize_tokens(m));

  ScoreMatrix s(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double total = 0.0;
      for (std::size_t t = 0; t < p; ++t) total += row_dot(u[i].row(t), v[j].row(sigmas[i].map[t]));
      s.at(i, j) = total / static_cast<double>(p);
    }
  }
  return s;
}

double standard_infonce(const Batch& batch, std::span<const Assignment> sigmas) {
  return infonce_from_scores(standard_scores(batch, sigmas), batch.tau);
}

}  // namespace lirlab::loss
