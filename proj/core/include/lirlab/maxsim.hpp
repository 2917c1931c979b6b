#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lirlab/embedding_store.hpp"
#include "lirlab/score_matrix.hpp"
#include "lirlab/token_matrix.hpp"
#include "lirlab/worker_pool.hpp"

namespace lirlab {

// Token-level MaxSim: the mean over the FIRST argument's tokens of the best
// inner product against any token of the second argument. Inputs are expected
// to be row-normalized, so inner products are cosines. The score is not
// symmetric: maxsim(a, b) averages over a's tokens.
//
// Every (s, r) inner product is accumulated in double, sequentially over the
// dimension index, so the brute and optimized paths perform the same
// floating-point operations per pair.

namespace detail {
template <typename T>
void check_dims(const BasicTokenMatrix<T>& a, const BasicTokenMatrix<T>& b) {
  if (a.dim() != b.dim()) {
    raise(ErrorCode::DimensionMismatch,
          "maxsim operands have d=" + std::to_string(a.dim()) + " and d=" + std::to_string(b.dim()));
  }
}
}  // namespace detail

/// Reference implementation: plain nested loops in a fixed order.
template <typename T>
double maxsim_brute(const BasicTokenMatrix<T>& a, const BasicTokenMatrix<T>& b) {
  detail::check_dims(a, b);
  double total = 0.0;
  for (std::size_t s = 0; s < a.tokens(); ++s) {
    const auto as = a.row(s);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < b.tokens(); ++r) {
      const auto br = b.row(r);
      double dot = 0.0;
      for (std::size_t k = 0; k < a.dim(); ++k) dot += static_cast<double>(as[k]) * static_cast<double>(br[k]);
      best = std::max(best, dot);
    }
    total += best;
  }
  return total / static_cast<double>(a.tokens());
}

/// A candidate's tokens stored dimension-major (d x p) so the inner loop of
/// the kernel walks contiguous memory across candidate tokens.
template <typename T>
class PackedCandidate {
 public:
  explicit PackedCandidate(const BasicTokenMatrix<T>& b) : tokens_(b.tokens()), dim_(b.dim()), t_(tokens_ * dim_) {
    for (std::size_t r = 0; r < tokens_; ++r) {
      const auto br = b.row(r);
      for (std::size_t k = 0; k < dim_; ++k) t_[k * tokens_ + r] = br[k];
    }
  }

  std::size_t tokens() const noexcept { return tokens_; }
  std::size_t dim() const noexcept { return dim_; }
  const T* column(std::size_t k) const noexcept { return t_.data() + k * tokens_; }

 private:
  std::size_t tokens_;
  std::size_t dim_;
  std::vector<T> t_;
};

/// Optimized kernel against a packed candidate. `scratch` must hold at least
/// packed.tokens() doubles.
template <typename T>
double maxsim_packed(const BasicTokenMatrix<T>& a, const PackedCandidate<T>& packed, std::span<double> scratch) {
  if (a.dim() != packed.dim()) {
    raise(ErrorCode::DimensionMismatch,
          "maxsim operands have d=" + std::to_string(a.dim()) + " and d=" + std::to_string(packed.dim()));
  }
  const std::size_t pb = packed.tokens();
  double* acc = scratch.data();
  double total = 0.0;
  for (std::size_t s = 0; s < a.tokens(); ++s) {
    const auto as = a.row(s);
    std::fill(acc, acc + pb, 0.0);
    for (std::size_t k = 0; k < a.dim(); ++k) {
      const double x = static_cast<double>(as[k]);
      const T* col = packed.column(k);
      for (std::size_t r = 0; r < pb; ++r) acc[r] += x * static_cast<double>(col[r]);
    }
    total += *std::max_element(acc, acc + pb);
  }
  return total / static_cast<double>(a.tokens());
}

/// Optimized path with the same contract as maxsim_brute.
template <typename T>
double maxsim(const BasicTokenMatrix<T>& a, const BasicTokenMatrix<T>& b) {
  detail::check_dims(a, b);
  PackedCandidate<T> packed(b);
  std::vector<double> scratch(packed.tokens());
  return maxsim_packed(a, packed, scratch);
}

/// scores[i][j] = maxsim(queries[i], candidates[j]). Each row is computed by
/// exactly one worker, so the output does not depend on the pool size.
template <typename T>
ScoreMatrix maxsim_matrix(std::span<const BasicTokenMatrix<T>> queries,
                          std::span<const BasicTokenMatrix<T>> candidates, WorkerPool& pool);

ScoreMatrix maxsim_matrix(const EmbeddingStore& queries, const EmbeddingStore& candidates, WorkerPool& pool);
ScoreMatrix maxsim_matrix(const EmbeddingStore& queries, const EmbeddingStore& candidates,
                          std::size_t threads = 1);

extern template ScoreMatrix maxsim_matrix<float>(std::span<const TokenMatrix>, std::span<const TokenMatrix>,
                                                 WorkerPool&);
extern template ScoreMatrix maxsim_matrix<double>(std::span<const TokenMatrix64>, std::span<const TokenMatrix64>,
                                                  WorkerPool&);

struct RankedEntry {
  std::size_t index = 0;
  std::string candidate_id;
  double score = 0.0;

  friend bool operator==(const RankedEntry&, const RankedEntry&) = default;
};

/// Candidates in descending score order, ties broken by ascending id.
struct RankedList {
  std::string query_id;
  std::vector<RankedEntry> entries;
};

/// True when a ranks ahead of b: higher score, then smaller id.
inline bool ranks_before(double score_a, const std::string& id_a, double score_b, const std::string& id_b) {
  if (score_a != score_b) return score_a > score_b;
  return id_a < id_b;
}

/// The k best candidates of one score row (all of them if k exceeds the row).
/// `exclude` removes one index, typically the query itself.
RankedList top_k(std::span<const double> scores, std::span<const std::string> candidate_ids, std::size_t k,
                 std::optional<std::size_t> exclude = std::nullopt, std::string query_id = {});

}  // namespace lirlab
