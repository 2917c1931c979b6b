#pragma once

#include <cstdint>
#include <optional>

#include "lirlab/embedding_store.hpp"

namespace lirlab {

struct SynthSpec {
  std::size_t n = 0;
  std::size_t p = 0;
  std::size_t d = 0;
  std::uint64_t seed = 0;
  /// When set, items are drawn around this many seeded centroids.
  std::optional<std::size_t> cluster_count;
  double noise_scale = 0.0;
};

/// Seeded synthetic corpus of normalized token matrices, ids "item_000000".
/// Without clusters every token is an independent Gaussian direction. With
/// clusters, item i belongs to centroid i % cluster_count and each token is
/// the centroid token plus noise_scale * N(0, I), then normalized.
EmbeddingStore synth_embeddings(const SynthSpec& spec);

}  // namespace lirlab
