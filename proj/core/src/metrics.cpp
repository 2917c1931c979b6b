#include "lirlab/metrics.hpp"

#include <algorithm>
#include <fstream>

#include <fmt/format.h>

#include "json.hpp"

namespace lirlab::metrics {

void validate(const EvalAnnotation& ann) {
  if (ann.query_id.empty()) raise(ErrorCode::InvalidArgument, "annotation with empty query_id");
  if (ann.relevant_ids.empty()) {
    raise(ErrorCode::InvalidArgument, "annotation '" + ann.query_id + "' has no relevant ids");
  }
  if (ann.subset_ids) {
    const bool overlap = std::any_of(ann.relevant_ids.begin(), ann.relevant_ids.end(),
                                     [&](const auto& id) { return ann.subset_ids->count(id) > 0; });
    if (!overlap) {
      raise(ErrorCode::InvalidArgument, "annotation '" + ann.query_id + "': no relevant id lies in subset_ids");
    }
  }
}

std::vector<EvalAnnotation> load_annotations(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoError, "cannot open '" + path.string() + "' for reading");
  std::vector<EvalAnnotation> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      EvalAnnotation ann;
      ann.query_id = j.at("query_id").get<std::string>();
      for (const auto& id : j.at("relevant_ids")) ann.relevant_ids.insert(id.get<std::string>());
      if (j.contains("subset_ids") && !j["subset_ids"].is_null()) {
        ann.subset_ids.emplace();
        for (const auto& id : j["subset_ids"]) ann.subset_ids->insert(id.get<std::string>());
      }
      validate(ann);
      out.push_back(std::move(ann));
    } catch (const nlohmann::json::exception& e) {
      raise(ErrorCode::FormatError, fmt::format("{}:{}: {}", path.string(), lineno, e.what()));
    } catch (const Error& e) {
      raise(ErrorCode::FormatError, fmt::format("{}:{}: {}", path.string(), lineno, e.what()));
    }
  }
  return out;
}

double recall_at_k(const RankedList& ranking, const EvalAnnotation& ann, std::size_t k) {
  const auto limit = std::min(k, ranking.entries.size());
  for (std::size_t r = 0; r < limit; ++r) {
    if (ann.relevant_ids.count(ranking.entries[r].candidate_id)) return 1.0;
  }
  return 0.0;
}

double recall_subset_at_k(const RankedList& ranking, const EvalAnnotation& ann, std::size_t k) {
  if (!ann.subset_ids) raise(ErrorCode::MissingSubset, "annotation '" + ann.query_id + "' has no subset_ids");
  RankedList restricted;
  restricted.query_id = ranking.query_id;
  for (const auto& e : ranking.entries) {
    if (ann.subset_ids->count(e.candidate_id)) restricted.entries.push_back(e);
  }
  if (restricted.entries.size() != ann.subset_ids->size()) {
    raise(ErrorCode::MissingSubset, "ranking for '" + ann.query_id + "' lacks " +
                                        std::to_string(ann.subset_ids->size() - restricted.entries.size()) +
                                        " subset member(s)");
  }
  return recall_at_k(restricted, ann, k);
}

double average_precision_at_k(const RankedList& ranking, const EvalAnnotation& ann, std::size_t k) {
  if (k == 0 || ann.relevant_ids.empty()) return 0.0;
  const auto limit = std::min(k, ranking.entries.size());
  std::size_t hits = 0;
  double sum = 0.0;
  for (std::size_t r = 0; r < limit; ++r) {
    if (ann.relevant_ids.count(ranking.entries[r].candidate_id)) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(r + 1);
    }
  }
  return sum / static_cast<double>(std::min(k, ann.relevant_ids.size()));
}

MetricsReport evaluate(const std::map<std::string, RankedList>& run, const std::vector<EvalAnnotation>& anns,
                       const std::vector<std::size_t>& ks, const std::optional<std::vector<std::size_t>>& subset_ks) {
  std::vector<const EvalAnnotation*> order;
  order.reserve(anns.size());
  for (const auto& a : anns) order.push_back(&a);
  std::sort(order.begin(), order.end(), [](const auto* a, const auto* b) { return a->query_id < b->query_id; });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (order[i]->query_id == order[i - 1]->query_id) {
      raise(ErrorCode::InvalidArgument, "duplicate annotation for query '" + order[i]->query_id + "'");
    }
  }
  for (const auto* a : order) {
    if (!run.count(a->query_id)) raise(ErrorCode::MissingQuery, "no ranking for query '" + a->query_id + "'");
  }
  for (auto k : ks) {
    if (k == 0) raise(ErrorCode::InvalidArgument, "cutoffs must be positive");
  }

  const auto with_subset = std::count_if(order.begin(), order.end(), [](const auto* a) { return a->subset_ids.has_value(); });
  const bool subsets = !order.empty() && with_subset == static_cast<std::ptrdiff_t>(order.size());
  if (with_subset > 0 && !subsets) {
    raise(ErrorCode::MissingSubset, "subset_ids present on some annotations but not all");
  }

  MetricsReport report;
  report.query_count = order.size();
  const double denom = static_cast<double>(std::max<std::size_t>(order.size(), 1));
  for (auto k : ks) {
    double recall = 0.0, ap = 0.0;
    for (const auto* a : order) {
      const auto& ranking = run.at(a->query_id);
      recall += recall_at_k(ranking, *a, k);
      ap += average_precision_at_k(ranking, *a, k);
    }
    report.recall_at[k] = recall / denom;
    report.map_at[k] = ap / denom;
  }
  if (subsets) {
    for (auto k : subset_ks.value_or(ks)) {
      if (k == 0) raise(ErrorCode::InvalidArgument, "cutoffs must be positive");
      double recall = 0.0;
      for (const auto* a : order) recall += recall_subset_at_k(run.at(a->query_id), *a, k);
      report.recall_subset_at[k] = recall / denom;
    }
  }
  if (report.recall_at.count(5) && report.recall_subset_at.count(1)) {
    report.avg_r5_rsub1 = (report.recall_at[5] + report.recall_subset_at[1]) / 2.0;
  }
  return report;
}

namespace {

std::string render_map(const std::map<std::size_t, double>& m) {
  if (m.empty()) return "{}";
  std::string out = "{";
  bool first = true;
  for (const auto& [k, v] : m) {
    out += fmt::format("{}\n    \"{}\": {:.6f}", first ? "" : ",", k, v);
    first = false;
  }
  return out + "\n  }";
}

}  // namespace

std::string to_json(const MetricsReport& r) {
  std::string out = "{\n";
  out += fmt::format("  \"query_count\": {},\n", r.query_count);
  out += "  \"recall_at\": " + render_map(r.recall_at) + ",\n";
  out += "  \"recall_subset_at\": " + render_map(r.recall_subset_at) + ",\n";
  out += "  \"map_at\": " + render_map(r.map_at) + ",\n";
  out += "  \"avg_r5_rsub1\": " + (r.avg_r5_rsub1 ? fmt::format("{:.6f}", *r.avg_r5_rsub1) : std::string("null"));
  out += "\n}\n";
  return out;
}

}  // namespace lirlab::metrics
