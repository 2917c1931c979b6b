#include "lirlab/curation/agent.hpp"

#include <fmt/format.h>

#include "lirlab/error.hpp"

namespace lirlab::curation {

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::string trim(std::string_view s) {
  const auto* ws = " \t\r\n\v\f";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(ws);
  return std::string(s.substr(first, last - first + 1));
}

std::string MockAgent::complete(const ChatRequest& request) {
  switch (request.task) {
    case TaskKind::caption:
      if (request.images.size() != 1) raise(ErrorCode::InvalidArgument, "caption request needs one image");
      return "mock caption for " + request.images[0].id;
    case TaskKind::modification:
    case TaskKind::modification_direct:
      if (request.images.size() != 2) raise(ErrorCode::InvalidArgument, "modification request needs two images");
      return fmt::format("mock modification {} -> {} [prompt {:016x}]", request.images[0].id, request.images[1].id,
                         fnv1a64(request.prompt));
  }
  raise(ErrorCode::InvalidArgument, "unknown task");
}

void validate_endpoint(const AgentEndpoint& endpoint) {
  if (endpoint.max_retries < 0) raise(ErrorCode::InvalidConfig, "agent max_retries must be >= 0");
  if (!(endpoint.timeout_seconds > 0.0)) raise(ErrorCode::InvalidConfig, "agent timeout must be > 0");
  if (endpoint.base_url.empty()) raise(ErrorCode::InvalidConfig, "agent base_url is empty");
  if (endpoint.model.empty()) raise(ErrorCode::InvalidConfig, "agent model is empty");
}

namespace {

void expect_template(const PromptTemplate& tpl, TemplateName name) {
  if (tpl.name != name) {
    raise(ErrorCode::TemplateError,
          "expected template " + std::string(to_string(name)) + ", got " + std::string(to_string(tpl.name)));
  }
}

std::string ask(Agent& agent, ChatRequest request) {
  auto text = trim(agent.complete(request));
  if (text.empty()) raise(ErrorCode::EmptyResponse, "agent returned an empty response");
  return text;
}

}  // namespace

std::string generate_caption(Agent& agent, const ImagePayload& image, const PromptTemplate& tpl) {
  expect_template(tpl, TemplateName::caption);
  return ask(agent, ChatRequest{TaskKind::caption, render(tpl, {}), {image}});
}

std::string generate_modification(Agent& agent, const ImagePayload& ref, const std::string& cap_ref,
                                  const ImagePayload& tgt, const std::string& cap_tgt, const PromptTemplate& tpl) {
  expect_template(tpl, TemplateName::modification);
  if (trim(cap_ref).empty() || trim(cap_tgt).empty()) {
    raise(ErrorCode::InvalidArgument, "modification generation needs two non-empty captions");
  }
  auto prompt = render(tpl, {{"cap1", cap_ref}, {"cap2", cap_tgt}});
  return ask(agent, ChatRequest{TaskKind::modification, std::move(prompt), {ref, tgt}});
}

std::string generate_modification_direct(Agent& agent, const ImagePayload& ref, const ImagePayload& tgt,
                                         const PromptTemplate& tpl) {
  expect_template(tpl, TemplateName::modification_direct);
  return ask(agent, ChatRequest{TaskKind::modification_direct, render(tpl, {}), {ref, tgt}});
}

}  // namespace lirlab::curation
