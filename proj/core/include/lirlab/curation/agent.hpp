#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "lirlab/curation/prompts.hpp"

namespace lirlab::curation {

/// What the agent sees of an image. `uri` may be empty (id-only, enough for
/// the mock), an http(s) or data: URL, or a local file path that the HTTP
/// client inlines as a base64 data URL.
struct ImagePayload {
  std::string id;
  std::string uri;
};

enum class TaskKind { caption, modification, modification_direct };

struct ChatRequest {
  TaskKind task = TaskKind::caption;
  std::string prompt;
  std::vector<ImagePayload> images;
};

/// A multimodal chat model. Implementations must be safe to call from
/// several threads at once.
class Agent {
 public:
  virtual ~Agent() = default;
  /// Raw response text of the first choice.
  virtual std::string complete(const ChatRequest& request) = 0;
  virtual std::string model() const = 0;
};

/// Deterministic offline agent.
///   caption:      "mock caption for <id>"
///   modification: "mock modification <ref> -> <tgt> [prompt <fnv1a64 hex of rendered prompt>]"
class MockAgent final : public Agent {
 public:
  std::string complete(const ChatRequest& request) override;
  std::string model() const override { return "mock"; }
};

std::uint64_t fnv1a64(std::string_view bytes) noexcept;

struct AgentEndpoint {
  std::string base_url;  // e.g. https://api.example.com/v1
  std::string model;
  std::string api_key;
  double timeout_seconds = 60.0;
  int max_retries = 3;
  double temperature = 0.2;
  std::chrono::milliseconds retry_backoff{500};
};

void validate_endpoint(const AgentEndpoint& endpoint);

/// OpenAI-style chat-completion client: POST <base_url>/chat/completions.
/// Connection failures, timeouts, 429 and 5xx are retried up to max_retries
/// times with linear backoff; other statuses fail immediately. Exhausted or
/// fatal attempts raise AgentUnavailable.
class HttpAgent final : public Agent {
 public:
  explicit HttpAgent(AgentEndpoint endpoint);
  std::string complete(const ChatRequest& request) override;
  std::string model() const override { return endpoint_.model; }

 private:
  AgentEndpoint endpoint_;
  std::string origin_;
  std::string path_;
};

/// JSON body {model, messages:[{role:"user", content:[image parts..., text]}], temperature}.
std::string build_chat_body(const AgentEndpoint& endpoint, const ChatRequest& request);
/// Text of choices[0].message.content (string or list of text parts).
std::string parse_chat_response(const std::string& body);

// The three agent calls. Responses are stripped of surrounding whitespace;
// an empty result raises EmptyResponse.
std::string generate_caption(Agent& agent, const ImagePayload& image, const PromptTemplate& tpl);
std::string generate_modification(Agent& agent, const ImagePayload& ref, const std::string& cap_ref,
                                  const ImagePayload& tgt, const std::string& cap_tgt, const PromptTemplate& tpl);
std::string generate_modification_direct(Agent& agent, const ImagePayload& ref, const ImagePayload& tgt,
                                         const PromptTemplate& tpl);

std::string trim(std::string_view s);

}  // namespace lirlab::curation
