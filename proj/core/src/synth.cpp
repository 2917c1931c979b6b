#include "lirlab/synth.hpp"

#include <fmt/format.h>

#include "lirlab/random.hpp"

namespace lirlab {

namespace {

void validate(const SynthSpec& spec) {
  if (spec.n < 2) raise(ErrorCode::InvalidSpec, "synthetic corpus needs n >= 2");
  if (spec.p < 1 || spec.d < 1) raise(ErrorCode::InvalidSpec, "synthetic corpus needs p >= 1 and d >= 1");
  if (!(spec.noise_scale >= 0.0) || !std::isfinite(spec.noise_scale)) {
    raise(ErrorCode::InvalidSpec, "noise_scale must be finite and non-negative");
  }
  if (spec.cluster_count) {
    if (*spec.cluster_count < 1 || *spec.cluster_count > spec.n) {
      raise(ErrorCode::InvalidSpec, "cluster_count must lie in [1, n]");
    }
  }
}

std::vector<double> gaussian_block(SeededStream& rng, std::size_t count) {
  std::vector<double> out(count);
  for (auto& x : out) x = rng.gaussian();
  return out;
}

// Gaussian rows can be arbitrarily close to zero in principle; redraw them.
void renormalize_rows(std::vector<double>& values, std::size_t d, SeededStream& rng) {
  for (std::size_t off = 0; off < values.size(); off += d) {
    for (;;) {
      double sq = 0.0;
      for (std::size_t k = 0; k < d; ++k) sq += values[off + k] * values[off + k];
      if (std::sqrt(sq) >= 1e-6) {
        const double norm = std::sqrt(sq);
        for (std::size_t k = 0; k < d; ++k) values[off + k] /= norm;
        break;
      }
      for (std::size_t k = 0; k < d; ++k) values[off + k] = rng.gaussian();
    }
  }
}

}  // namespace

EmbeddingStore synth_embeddings(const SynthSpec& spec) {
  validate(spec);
  const std::size_t per_item = spec.p * spec.d;

  std::vector<std::vector<double>> centroids;
  if (spec.cluster_count) {
    SeededStream crng(derive_seed(spec.seed, 0xC0FFEE));
    for (std::size_t c = 0; c < *spec.cluster_count; ++c) centroids.push_back(gaussian_block(crng, per_item));
  }

  SeededStream rng(derive_seed(spec.seed, 1));
  std::vector<std::string> ids;
  std::vector<TokenMatrix> matrices;
  ids.reserve(spec.n);
  matrices.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    std::vector<double> values;
    if (centroids.empty()) {
      values = gaussian_block(rng, per_item);
    } else {
      values = centroids[i % centroids.size()];
      for (auto& x : values) x += spec.noise_scale * rng.gaussian();
    }
    renormalize_rows(values, spec.d, rng);
    ids.push_back(fmt::format("item_{:06d}", i));
    matrices.push_back(normalize_tokens(TokenMatrix(spec.p, spec.d, std::vector<float>(values.begin(), values.end()))));
  }
  return EmbeddingStore(std::move(ids), std::move(matrices));
}

}  // namespace lirlab
