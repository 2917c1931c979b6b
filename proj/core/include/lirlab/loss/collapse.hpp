#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lirlab/token_matrix.hpp"

namespace lirlab::loss {

enum class StepRule {
  armijo,    // backtracking line search, trial step doubles after each accepted step
  constant,  // fixed step_size every iteration
};

StepRule step_rule_from_string(std::string_view s);
std::string_view to_string(StepRule rule) noexcept;

struct CollapseConfig {
  std::size_t m = 8;  // items
  std::size_t p = 1;  // tokens per item
  std::size_t d = 8;  // dimension
  double tau = 0.1;
  std::size_t steps = 5000;
  /// Constant step, or the first trial step under StepRule::armijo.
  double step_size = 0.5;
  std::uint64_t seed = 11;
  /// Share parameters between U and V (V = U throughout).
  bool tie_v_to_u = false;
  StepRule step_rule = StepRule::armijo;
};

/// Throws InvalidConfig unless m >= 2, p, d >= 1, d*p >= m - 1, tau > 0 and
/// step_size > 0.
void validate(const CollapseConfig& cfg);

struct CollapseReport {
  double final_objective = 0.0;
  /// max_{i != j} |<U_i, U_j> + 1/(M-1)| on flattened 1/sqrt(p)-scaled stacks.
  double etf_error = 0.0;
  /// max_i ||U_i - V_i|| with V_i stacked in its argmax-assignment order.
  double alignment_error = 0.0;
  std::vector<double> objective_trace;  // after each step
  std::vector<double> etf_trace;
  std::vector<double> alignment_trace;
  std::vector<TokenMatrix64> queries;
  std::vector<TokenMatrix64> targets;
};

/// Full-batch projected gradient ascent on InfoNCE with MaxSim over free unit
/// token vectors, re-normalizing every row after each step.
CollapseReport collapse_lab(const CollapseConfig& cfg);

double etf_error(const std::vector<TokenMatrix64>& queries);
double alignment_error(const std::vector<TokenMatrix64>& queries, const std::vector<TokenMatrix64>& targets);

std::string to_json(const CollapseConfig& cfg, const CollapseReport& report, double threshold);
/// CSV with header step,objective,etf_error,alignment_error.
void write_trace_csv(const CollapseReport& report, const std::filesystem::path& path);

}  // namespace lirlab::loss
