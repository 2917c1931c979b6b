#include "lirlab/maxsim.hpp"

#include <bit>
#include <cstring>
#include <numeric>

namespace lirlab {

std::uint64_t checksum(const ScoreMatrix& m) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xFF;
      h *= 0x100000001B3ULL;
    }
  };
  mix(m.rows);
  mix(m.cols);
  for (double x : m.values) mix(std::bit_cast<std::uint64_t>(x));
  return h;
}

template <typename T>
ScoreMatrix maxsim_matrix(std::span<const BasicTokenMatrix<T>> queries,
                          std::span<const BasicTokenMatrix<T>> candidates, WorkerPool& pool) {
  if (!queries.empty() && !candidates.empty() && queries.front().dim() != candidates.front().dim()) {
    raise(ErrorCode::DimensionMismatch, "query d=" + std::to_string(queries.front().dim()) +
                                            " but candidate d=" + std::to_string(candidates.front().dim()));
  }
  std::vector<PackedCandidate<T>> packed;
  packed.reserve(candidates.size());
  std::size_t max_tokens = 0;
  for (const auto& c : candidates) {
    packed.emplace_back(c);
    max_tokens = std::max(max_tokens, c.tokens());
  }

  ScoreMatrix out(queries.size(), candidates.size());
  pool.parallel_for(queries.size(), [&](std::size_t i) {
    std::vector<double> scratch(max_tokens);
    for (std::size_t j = 0; j < packed.size(); ++j) {
      out.at(i, j) = maxsim_packed(queries[i], packed[j], scratch);
    }
  });
  return out;
}

template ScoreMatrix maxsim_matrix<float>(std::span<const TokenMatrix>, std::span<const TokenMatrix>, WorkerPool&);
template ScoreMatrix maxsim_matrix<double>(std::span<const TokenMatrix64>, std::span<const TokenMatrix64>,
                                           WorkerPool&);

ScoreMatrix maxsim_matrix(const EmbeddingStore& queries, const EmbeddingStore& candidates, WorkerPool& pool) {
  return maxsim_matrix<float>(std::span<const TokenMatrix>(queries.matrices()),
                              std::span<const TokenMatrix>(candidates.matrices()), pool);
}

ScoreMatrix maxsim_matrix(const EmbeddingStore& queries, const EmbeddingStore& candidates, std::size_t threads) {
  WorkerPool pool(threads);
  return maxsim_matrix(queries, candidates, pool);
}

RankedList top_k(std::span<const double> scores, std::span<const std::string> candidate_ids, std::size_t k,
                 std::optional<std::size_t> exclude, std::string query_id) {
  if (scores.size() != candidate_ids.size()) {
    raise(ErrorCode::InvalidArgument, "top_k: score row and id list differ in length");
  }
  if (k == 0) raise(ErrorCode::InvalidArgument, "top_k: k must be positive");

  std::vector<std::size_t> order;
  order.reserve(scores.size());
  for (std::size_t j = 0; j < scores.size(); ++j) {
    if (exclude && *exclude == j) continue;
    order.push_back(j);
  }
  const auto cmp = [&](std::size_t a, std::size_t b) {
    return ranks_before(scores[a], candidate_ids[a], scores[b], candidate_ids[b]);
  };
  const std::size_t keep = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(), cmp);

  RankedList out;
  out.query_id = std::move(query_id);
  out.entries.reserve(keep);
  for (std::size_t r = 0; r < keep; ++r) {
    const auto j = order[r];
    out.entries.push_back(RankedEntry{j, candidate_ids[j], scores[j]});
  }
  return out;
}

}  // namespace lirlab
