#pragma once

#include <cstddef>
#include <vector>

#include "lirlab/score_matrix.hpp"
#include "lirlab/token_matrix.hpp"

namespace lirlab::loss {

/// N composed-query token sets and their N matched targets. Rows need not be
/// unit length: every function here normalizes rows internally, so losses are
/// functions of the raw token vectors (which is what the gradient refers to).
struct Batch {
  std::vector<TokenMatrix64> queries;  // u_i
  std::vector<TokenMatrix64> targets;  // v_j
  double tau = 0.1;

  std::size_t size() const noexcept { return queries.size(); }
};

/// Throws InvalidArgument unless |U| = |V| >= 1, shapes are uniform and tau > 0.
void validate_batch(const Batch& batch);

/// s_ij = maxsim(u_i, v_j) on row-normalized tokens.
ScoreMatrix batch_scores(const Batch& batch);

/// Mean over rows of log softmax of the diagonal entry at temperature tau:
///   L = (1/N) sum_i [ s_ii/tau - log sum_j exp(s_ij/tau) ],
/// with a max-shifted log-sum-exp. L <= 0; adding a constant to every score
/// leaves it unchanged. Requires a square matrix.
double infonce_from_scores(const ScoreMatrix& scores, double tau);

/// InfoNCE with MaxSim similarity. Treated as an objective to maximize.
double infonce_maxsim(const Batch& batch);

enum class TiePolicy {
  reject,       // raise TieDetected when an inner argmax is ambiguous
  first_index,  // take the smallest token index (a valid subgradient)
};

/// Ambiguity margin for inner argmax ties.
inline constexpr double kTieTolerance = 1e-12;

/// dL with respect to every raw token coordinate; same layout as the batch
/// (one p*d row-major vector per item).
struct BatchGradient {
  std::vector<std::vector<double>> queries;
  std::vector<std::vector<double>> targets;
};

/// Analytic gradient of infonce_maxsim, chained through row normalization.
/// Each inner max routes its gradient to the single maximizing token.
BatchGradient infonce_maxsim_grad(const Batch& batch, TiePolicy ties = TiePolicy::reject);

/// Objective and gradient from one pass.
double infonce_maxsim_value_and_grad(const Batch& batch, BatchGradient& grad, TiePolicy ties);

}  // namespace lirlab::loss
