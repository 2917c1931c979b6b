#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace lirlab {

/// Row-major query x candidate similarity scores.
struct ScoreMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  ScoreMatrix() = default;
  ScoreMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  double& at(std::size_t i, std::size_t j) { return values[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(values).subspan(i * cols, cols);
  }

  friend bool operator==(const ScoreMatrix&, const ScoreMatrix&) = default;
};

/// FNV-1a over the raw bit patterns of every score; equal checksums mean
/// bit-identical matrices for all practical purposes.
std::uint64_t checksum(const ScoreMatrix& m) noexcept;

}  // namespace lirlab
