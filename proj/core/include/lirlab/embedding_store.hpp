#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "lirlab/token_matrix.hpp"

namespace lirlab {

/// Ordered, id-keyed collection of token matrices with uniform (p, d).
class EmbeddingStore {
 public:
  EmbeddingStore(std::vector<std::string> ids, std::vector<TokenMatrix> matrices);

  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t tokens() const noexcept { return matrices_.front().tokens(); }
  std::size_t dim() const noexcept { return matrices_.front().dim(); }

  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const std::vector<TokenMatrix>& matrices() const noexcept { return matrices_; }
  const std::string& id(std::size_t i) const { return ids_.at(i); }
  const TokenMatrix& matrix(std::size_t i) const { return matrices_.at(i); }

  std::optional<std::size_t> index_of(const std::string& id) const;

  /// True when every matrix is normalized.
  bool normalized() const noexcept;

  friend bool operator==(const EmbeddingStore& a, const EmbeddingStore& b) {
    return a.ids_ == b.ids_ && a.matrices_ == b.matrices_;
  }

 private:
  std::vector<std::string> ids_;
  std::vector<TokenMatrix> matrices_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Returns a copy with every matrix normalized.
EmbeddingStore normalize_store(const EmbeddingStore& store);

// TEMB binary format, little-endian:
//   "TEMB" | u32 version=1 | u64 n | u32 p | u32 d | u32 dtype (1 = f32)
//   n x (u32 byte length, UTF-8 id bytes)
//   n*p*d f32 values, row-major, grouped by item
inline constexpr std::uint32_t kTembVersion = 1;
inline constexpr std::uint32_t kTembDtypeF32 = 1;

EmbeddingStore load_embedding_store(const std::filesystem::path& path);
void save_embedding_store(const EmbeddingStore& store, const std::filesystem::path& path);

/// In-memory codec behind load/save.
std::vector<unsigned char> encode_temb(const EmbeddingStore& store);
EmbeddingStore decode_temb(const std::vector<unsigned char>& bytes);

}  // namespace lirlab
