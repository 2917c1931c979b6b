#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "lirlab/error.hpp"

namespace lirlab {

/// Rows whose L2 norm lies within this distance of 1 count as unit rows.
inline constexpr double kUnitNormTolerance = 1e-6;
/// Rows with a smaller norm cannot be normalized.
inline constexpr double kZeroNormThreshold = 1e-12;

/// One item's token embeddings: `tokens()` rows of `dim()` values, row-major.
///
/// Immutable after construction. The `normalized()` flag is true when every
/// row has unit norm within kUnitNormTolerance; it is derived from the data at
/// construction so two matrices with equal values always compare equal.
template <typename T>
class BasicTokenMatrix {
 public:
  using value_type = T;

  BasicTokenMatrix(std::size_t tokens, std::size_t dim, std::vector<T> values)
      : tokens_(tokens), dim_(dim), values_(std::move(values)) {
    if (tokens_ == 0 || dim_ == 0) {
      raise(ErrorCode::InvalidArgument, "token matrix needs p >= 1 and d >= 1");
    }
    if (values_.size() != tokens_ * dim_) {
      raise(ErrorCode::InvalidArgument,
            "token matrix holds " + std::to_string(values_.size()) +
                " values, expected " + std::to_string(tokens_ * dim_));
    }
    normalized_ = true;
    for (std::size_t s = 0; s < tokens_; ++s) {
      double sq = 0.0;
      for (T x : row(s)) {
        if (!std::isfinite(static_cast<double>(x))) {
          raise(ErrorCode::InvalidArgument,
                "token matrix contains a non-finite value in row " + std::to_string(s));
        }
        sq += static_cast<double>(x) * static_cast<double>(x);
      }
      if (std::abs(std::sqrt(sq) - 1.0) > kUnitNormTolerance) normalized_ = false;
    }
  }

  static BasicTokenMatrix from_rows(const std::vector<std::vector<T>>& rows) {
    if (rows.empty()) raise(ErrorCode::InvalidArgument, "token matrix needs p >= 1");
    const std::size_t dim = rows.front().size();
    std::vector<T> values;
    values.reserve(rows.size() * dim);
    for (const auto& r : rows) {
      if (r.size() != dim) raise(ErrorCode::InvalidArgument, "ragged token rows");
      values.insert(values.end(), r.begin(), r.end());
    }
    return BasicTokenMatrix(rows.size(), dim, std::move(values));
  }

  std::size_t tokens() const noexcept { return tokens_; }
  std::size_t dim() const noexcept { return dim_; }
  bool normalized() const noexcept { return normalized_; }

  std::span<const T> values() const noexcept { return values_; }
  std::span<const T> row(std::size_t s) const noexcept {
    return std::span<const T>(values_).subspan(s * dim_, dim_);
  }

  template <typename U>
  BasicTokenMatrix<U> cast() const {
    return BasicTokenMatrix<U>(tokens_, dim_, std::vector<U>(values_.begin(), values_.end()));
  }

  friend bool operator==(const BasicTokenMatrix& a, const BasicTokenMatrix& b) {
    return a.tokens_ == b.tokens_ && a.dim_ == b.dim_ && a.values_ == b.values_;
  }

 private:
  std::size_t tokens_;
  std::size_t dim_;
  std::vector<T> values_;
  bool normalized_ = false;
};

using TokenMatrix = BasicTokenMatrix<float>;
using TokenMatrix64 = BasicTokenMatrix<double>;

/// Divides every row by its L2 norm (computed in double). A matrix that is
/// already normalized is returned unchanged, which makes the operation
/// idempotent bit for bit.
template <typename T>
BasicTokenMatrix<T> normalize_tokens(const BasicTokenMatrix<T>& m) {
  if (m.normalized()) return m;
  std::vector<T> out(m.values().begin(), m.values().end());
  for (std::size_t s = 0; s < m.tokens(); ++s) {
    double sq = 0.0;
    for (T x : m.row(s)) sq += static_cast<double>(x) * static_cast<double>(x);
    const double norm = std::sqrt(sq);
    if (norm < kZeroNormThreshold) {
      raise(ErrorCode::ZeroNormToken, "token row " + std::to_string(s) + " has zero norm");
    }
    for (std::size_t k = 0; k < m.dim(); ++k) {
      auto& x = out[s * m.dim() + k];
      x = static_cast<T>(static_cast<double>(x) / norm);
    }
  }
  return BasicTokenMatrix<T>(m.tokens(), m.dim(), std::move(out));
}

extern template class BasicTokenMatrix<float>;
extern template class BasicTokenMatrix<double>;

}  // namespace lirlab
