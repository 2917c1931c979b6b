#include "lirlab/curation/curate.hpp"

#include <fstream>
#include <map>
#include <mutex>

#include "json.hpp"
#include "lirlab/maxsim.hpp"

namespace lirlab::curation {

using nlohmann::ordered_json;

std::string_view to_string(Protocol p) noexcept { return p == Protocol::two_step ? "two_step" : "direct"; }

Protocol protocol_from_string(std::string_view s) {
  if (s == "two_step") return Protocol::two_step;
  if (s == "direct") return Protocol::direct;
  raise(ErrorCode::InvalidConfig, "unknown protocol '" + std::string(s) + "' (expected two_step or direct)");
}

FailurePolicy failure_policy_from_string(std::string_view s) {
  if (s == "abort") return FailurePolicy::abort;
  if (s == "skip") return FailurePolicy::skip;
  raise(ErrorCode::InvalidConfig, "unknown failure policy '" + std::string(s) + "' (expected abort or skip)");
}

std::string to_jsonl_line(const Triplet& t) {
  ordered_json j;
  j["ref_id"] = t.ref_id;
  j["target_id"] = t.target_id;
  j["modification"] = t.modification;
  j["caption_ref"] = t.caption_ref ? ordered_json(*t.caption_ref) : ordered_json(nullptr);
  j["caption_target"] = t.caption_target ? ordered_json(*t.caption_target) : ordered_json(nullptr);
  j["rank"] = t.rank;
  j["similarity"] = t.similarity;
  j["agent_model"] = t.agent_model;
  j["protocol"] = to_string(t.protocol);
  return j.dump();
}

Triplet triplet_from_jsonl_line(const std::string& line) {
  try {
    const auto j = nlohmann::json::parse(line);
    Triplet t;
    t.ref_id = j.at("ref_id").get<std::string>();
    t.target_id = j.at("target_id").get<std::string>();
    t.modification = j.at("modification").get<std::string>();
    if (!j.at("caption_ref").is_null()) t.caption_ref = j["caption_ref"].get<std::string>();
    if (!j.at("caption_target").is_null()) t.caption_target = j["caption_target"].get<std::string>();
    t.rank = j.at("rank").get<std::size_t>();
    t.similarity = j.at("similarity").get<double>();
    t.agent_model = j.at("agent_model").get<std::string>();
    t.protocol = protocol_from_string(j.at("protocol").get<std::string>());
    return t;
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::FormatError, std::string("bad triplet line: ") + e.what());
  }
}

void write_triplets_jsonl(const std::vector<Triplet>& triplets, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  for (const auto& t : triplets) out << to_jsonl_line(t) << '\n';
  out.flush();
  if (!out) raise(ErrorCode::IoError, "write failed for '" + path.string() + "'");
}

std::vector<Triplet> read_triplets_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoError, "cannot open '" + path.string() + "' for reading");
  std::vector<Triplet> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(triplet_from_jsonl_line(line));
  }
  return out;
}

PayloadResolver id_only_resolver() {
  return [](const std::string& id) { return ImagePayload{id, {}}; };
}

namespace {

struct Outcome {
  std::optional<std::string> text;
  ErrorCode code = ErrorCode::InvalidArgument;
  std::string message;
};

template <typename F>
Outcome capture(F&& f) {
  try {
    return Outcome{f(), {}, {}};
  } catch (const Error& e) {
    return Outcome{std::nullopt, e.code(), e.what()};
  }
}

}  // namespace

CurationResult curate_triplets(const EmbeddingStore& store, const PayloadResolver& resolver,
                               const CurationOptions& options, Agent& agent, WorkerPool& pool) {
  const auto n = store.size();
  validate_window(options.mining, n);
  if (options.protocol == Protocol::two_step) {
    validate_template(options.templates.caption);
    validate_template(options.templates.modification);
  } else {
    validate_template(options.templates.direct);
  }

  const auto normalized = store.normalized() ? store : normalize_store(store);
  const auto scores = maxsim_matrix(normalized, normalized, pool);
  const std::span<const std::string> ids(store.ids());

  // Selection is sequential so that reuse avoidance is order-deterministic.
  std::vector<TargetSelection> selections;
  selections.reserve(n);
  std::vector<bool> used(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = mining_stream(options.mining.seed, i);
    auto sel = select_target(i, scores.row(i), ids, options.mining, rng, used);
    used[sel.target_index] = true;
    selections.push_back(std::move(sel));
  }

  std::vector<ImagePayload> payloads(n);
  for (std::size_t i = 0; i < n; ++i) payloads[i] = resolver(store.id(i));

  WorkerPool agents(std::max<std::size_t>(1, options.max_in_flight));

  std::map<std::size_t, Outcome> captions;
  if (options.protocol == Protocol::two_step) {
    for (const auto& sel : selections) {
      captions[*store.index_of(sel.ref_id)];
      captions[sel.target_index];
    }
    std::vector<std::size_t> keys;
    for (const auto& [k, _] : captions) keys.push_back(k);
    std::vector<Outcome> results(keys.size());
    agents.parallel_for(keys.size(), [&](std::size_t t) {
      results[t] = capture([&] { return generate_caption(agent, payloads[keys[t]], options.templates.caption); });
    });
    for (std::size_t t = 0; t < keys.size(); ++t) captions[keys[t]] = std::move(results[t]);
  }

  std::vector<Outcome> modifications(n);
  agents.parallel_for(n, [&](std::size_t i) {
    const auto& sel = selections[i];
    if (options.protocol == Protocol::direct) {
      modifications[i] = capture([&] {
        return generate_modification_direct(agent, payloads[i], payloads[sel.target_index], options.templates.direct);
      });
      return;
    }
    const auto& cr = captions.at(i);
    const auto& ct = captions.at(sel.target_index);
    if (!cr.text) {
      modifications[i] = Outcome{std::nullopt, cr.code, "caption of '" + store.id(i) + "': " + cr.message};
    } else if (!ct.text) {
      modifications[i] = Outcome{std::nullopt, ct.code, "caption of '" + sel.target_id + "': " + ct.message};
    } else {
      modifications[i] = capture([&] {
        return generate_modification(agent, payloads[i], *cr.text, payloads[sel.target_index], *ct.text,
                                     options.templates.modification);
      });
    }
  });

  CurationResult result;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& sel = selections[i];
    auto& mod = modifications[i];
    if (!mod.text) {
      if (options.failure_policy == FailurePolicy::abort) {
        raise(mod.code, "ref_id=" + sel.ref_id + ": " + mod.message);
      }
      result.failures.push_back(CurationFailure{sel.ref_id, mod.code, mod.message});
      continue;
    }
    Triplet t;
    t.ref_id = sel.ref_id;
    t.target_id = sel.target_id;
    t.modification = std::move(*mod.text);
    if (options.protocol == Protocol::two_step) {
      t.caption_ref = *captions.at(i).text;
      t.caption_target = *captions.at(sel.target_index).text;
    }
    t.rank = sel.rank;
    t.similarity = sel.similarity;
    t.agent_model = agent.model();
    t.protocol = options.protocol;
    result.triplets.push_back(std::move(t));
  }
  return result;
}

}  // namespace lirlab::curation
