#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lirlab/score_matrix.hpp"
#include "lirlab/loss/infonce.hpp"
#include "lirlab/token_matrix.hpp"

namespace lirlab::loss {

/// Token matching sigma: map[s] is the target token paired with query token s
/// (0-based).
struct Assignment {
  std::vector<std::size_t> map;
  bool bijective = false;
  /// Some argmax was ambiguous within kTieTolerance; the smallest index won.
  bool has_ties = false;
};

bool is_bijective(std::span<const std::size_t> map, std::size_t p);

/// map[s] = argmax_r <u_s, v_r> over row-normalized tokens; requires equal p.
Assignment argmax_assignment(const TokenMatrix64& u, const TokenMatrix64& v);

/// The bijection maximizing sum_s <u_s, v_sigma(s)> (Hungarian method).
Assignment max_weight_bijection(const TokenMatrix64& u, const TokenMatrix64& v);

/// s-hat_ij = (1/p) sum_s <u_i^s, v_j^{sigma_i(s)}>, the flattened inner
/// product of the 1/sqrt(p)-scaled stacks with V_j ordered by sigma_i.
/// Raises NonBijectiveSigma if any sigma is not a bijection.
ScoreMatrix standard_scores(const Batch& batch, std::span<const Assignment> sigmas);

/// Standard InfoNCE on s-hat.
double standard_infonce(const Batch& batch, std::span<const Assignment> sigmas);

}  // namespace lirlab::loss
