#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lirlab/random.hpp"

namespace lirlab::curation {

/// Moderate-similarity window. Ranks are 1-based over the n-1 images other
/// than the reference, so q1 = 1 names the most similar other image.
struct MiningConfig {
  std::size_t q1 = 51;
  std::size_t q2 = 60;
  std::uint64_t seed = 0;
  /// When false, a target already chosen by an earlier reference is skipped.
  bool allow_reuse = true;
};

/// Throws InvalidConfig for q1 < 1 or q1 > q2 and WindowOutOfRange when
/// q2 > n - 1.
void validate_window(const MiningConfig& cfg, std::size_t n);

struct TargetSelection {
  std::string ref_id;
  std::string target_id;
  std::size_t target_index = 0;
  std::size_t rank = 0;
  double similarity = 0.0;
};

/// The random stream used for reference `ref_index`; selection is a pure
/// function of (seed, ref_index) and the score row.
SeededStream mining_stream(std::uint64_t seed, std::size_t ref_index);

/// Ranks the other candidates by (score desc, id asc) and draws a rank
/// uniformly from [q1, q2]. `used`, when non-empty, marks targets taken by
/// earlier references; those are skipped when cfg.allow_reuse is false and
/// WindowExhausted is raised if no window rank is left.
TargetSelection select_target(std::size_t ref_index, std::span<const double> scores,
                              std::span<const std::string> ids, const MiningConfig& cfg, SeededStream& rng,
                              const std::vector<bool>& used = {});

}  // namespace lirlab::curation
