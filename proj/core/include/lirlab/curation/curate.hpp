#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lirlab/curation/agent.hpp"
#include "lirlab/curation/mining.hpp"
#include "lirlab/curation/prompts.hpp"
#include "lirlab/embedding_store.hpp"
#include "lirlab/error.hpp"
#include "lirlab/worker_pool.hpp"

namespace lirlab::curation {

enum class Protocol { two_step, direct };
enum class FailurePolicy { abort, skip };

std::string_view to_string(Protocol p) noexcept;
Protocol protocol_from_string(std::string_view s);
FailurePolicy failure_policy_from_string(std::string_view s);

/// <reference, modification text, target> plus provenance.
struct Triplet {
  std::string ref_id;
  std::string target_id;
  std::string modification;
  std::optional<std::string> caption_ref;
  std::optional<std::string> caption_target;
  std::size_t rank = 0;
  double similarity = 0.0;
  std::string agent_model;
  Protocol protocol = Protocol::two_step;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

/// One JSON object, keys in the fixed order ref_id, target_id, modification,
/// caption_ref, caption_target, rank, similarity, agent_model, protocol.
/// Absent captions are written as null. No trailing newline.
std::string to_jsonl_line(const Triplet& t);
Triplet triplet_from_jsonl_line(const std::string& line);

void write_triplets_jsonl(const std::vector<Triplet>& triplets, const std::filesystem::path& path);
std::vector<Triplet> read_triplets_jsonl(const std::filesystem::path& path);

struct Templates {
  PromptTemplate caption = default_template(TemplateName::caption);
  PromptTemplate modification = default_template(TemplateName::modification);
  PromptTemplate direct = default_template(TemplateName::modification_direct);
};

struct CurationOptions {
  MiningConfig mining;
  Protocol protocol = Protocol::two_step;
  FailurePolicy failure_policy = FailurePolicy::abort;
  /// Concurrent agent calls.
  std::size_t max_in_flight = 1;
  Templates templates;
};

struct CurationFailure {
  std::string ref_id;
  ErrorCode code;
  std::string message;
};

struct CurationResult {
  std::vector<Triplet> triplets;        // store order
  std::vector<CurationFailure> failures;  // only under FailurePolicy::skip
};

using PayloadResolver = std::function<ImagePayload(const std::string& id)>;

/// Resolver that passes the id through with no image location.
PayloadResolver id_only_resolver();

/// One triplet per store item as reference. Similarities come from
/// maxsim_matrix(store, store) with the reference as the first argument;
/// targets from select_target; text from the chosen protocol. Captions are
/// requested once per distinct image. Under FailurePolicy::abort the first
/// failing reference in store order is rethrown with its ref_id prepended.
CurationResult curate_triplets(const EmbeddingStore& store, const PayloadResolver& resolver,
                               const CurationOptions& options, Agent& agent, WorkerPool& pool);

}  // namespace lirlab::curation
