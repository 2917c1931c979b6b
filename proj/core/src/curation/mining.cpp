#include "lirlab/curation/mining.hpp"

#include "lirlab/error.hpp"
#include "lirlab/maxsim.hpp"

namespace lirlab::curation {

void validate_window(const MiningConfig& cfg, std::size_t n) {
  if (cfg.q1 < 1 || cfg.q1 > cfg.q2) {
    raise(ErrorCode::InvalidConfig,
          "mining window needs 1 <= q1 <= q2, got [" + std::to_string(cfg.q1) + ", " + std::to_string(cfg.q2) + "]");
  }
  if (n < 1 || cfg.q2 > n - 1) {
    raise(ErrorCode::WindowOutOfRange, "q2=" + std::to_string(cfg.q2) + " exceeds the " + std::to_string(n - 1) +
                                           " other images (n=" + std::to_string(n) + ")");
  }
}

SeededStream mining_stream(std::uint64_t seed, std::size_t ref_index) {
  return SeededStream(derive_seed(seed, ref_index));
}

TargetSelection select_target(std::size_t ref_index, std::span<const double> scores,
                              std::span<const std::string> ids, const MiningConfig& cfg, SeededStream& rng,
                              const std::vector<bool>& used) {
  validate_window(cfg, scores.size());
  if (ref_index >= scores.size()) raise(ErrorCode::InvalidArgument, "reference index out of range");

  const auto ranking = top_k(scores, ids, cfg.q2, ref_index);

  std::vector<std::size_t> window;  // 1-based ranks still available
  for (std::size_t rank = cfg.q1; rank <= cfg.q2; ++rank) {
    const auto idx = ranking.entries[rank - 1].index;
    if (cfg.allow_reuse || used.empty() || !used[idx]) window.push_back(rank);
  }
  if (window.empty()) {
    raise(ErrorCode::WindowExhausted, "every target ranked in [" + std::to_string(cfg.q1) + ", " +
                                          std::to_string(cfg.q2) + "] for '" + ids[ref_index] +
                                          "' is already taken");
  }
  const auto rank = window[rng.below(window.size())];
  const auto& entry = ranking.entries[rank - 1];
  return TargetSelection{ids[ref_index], entry.candidate_id, entry.index, rank, entry.score};
}

}  // namespace lirlab::curation
