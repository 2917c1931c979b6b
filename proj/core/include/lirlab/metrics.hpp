#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lirlab/maxsim.hpp"

namespace lirlab::metrics {

struct EvalAnnotation {
  std::string query_id;
  std::set<std::string> relevant_ids;
  /// Candidate subset for subset recall (CIRR-style), if the dataset has one.
  std::optional<std::set<std::string>> subset_ids;
};

void validate(const EvalAnnotation& ann);

/// Reads one {query_id, relevant_ids: [...], subset_ids: [...]?} object per line.
std::vector<EvalAnnotation> load_annotations(const std::filesystem::path& path);

/// 1 if any relevant id is within the first k entries, else 0.
double recall_at_k(const RankedList& ranking, const EvalAnnotation& ann, std::size_t k);

/// The ranking restricted to subset_ids (relative order kept), scored with
/// recall_at_k. Raises MissingSubset without subset_ids or when a subset
/// member is absent from the ranking.
double recall_subset_at_k(const RankedList& ranking, const EvalAnnotation& ann, std::size_t k);

/// Truncated AP: (1 / min(k, |relevant|)) * sum_{r <= k} precision@r * rel(r).
double average_precision_at_k(const RankedList& ranking, const EvalAnnotation& ann, std::size_t k);

struct MetricsReport {
  std::map<std::size_t, double> recall_at;
  std::map<std::size_t, double> recall_subset_at;
  std::map<std::size_t, double> map_at;
  /// (R@5 + R_subset@1) / 2 when both were computed.
  std::optional<double> avg_r5_rsub1;
  std::size_t query_count = 0;
};

/// Averages every metric over annotations with equal weight, summing in
/// ascending query_id order. Subset recall is computed when every annotation
/// carries subset_ids (at `subset_ks`, defaulting to `ks`) and skipped when
/// none does; a mix raises MissingSubset. Raises MissingQuery if an
/// annotation has no ranking.
MetricsReport evaluate(const std::map<std::string, RankedList>& run, const std::vector<EvalAnnotation>& anns,
                       const std::vector<std::size_t>& ks,
                       const std::optional<std::vector<std::size_t>>& subset_ks = std::nullopt);

/// JSON with keys query_count, recall_at, recall_subset_at, map_at,
/// avg_r5_rsub1; every metric value printed with six decimals.
std::string to_json(const MetricsReport& report);

}  // namespace lirlab::metrics
