#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "lirlab/curation/agent.hpp"
#include "lirlab/error.hpp"

namespace lirlab::curation {

namespace {

using nlohmann::ordered_json;

std::string base64(const std::string& bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::string mime_for(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".png") return "image/png";
  if (ext == ".webp") return "image/webp";
  if (ext == ".gif") return "image/gif";
  return "image/jpeg";
}

std::string image_url(const ImagePayload& image) {
  const auto& uri = image.uri;
  if (uri.rfind("http://", 0) == 0 || uri.rfind("https://", 0) == 0 || uri.rfind("data:", 0) == 0) return uri;
  std::ifstream in(uri, std::ios::binary);
  if (!in) raise(ErrorCode::IoError, "cannot read image '" + uri + "' for '" + image.id + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return "data:" + mime_for(uri) + ";base64," + base64(ss.str());
}

// Splits "https://host:port/v1" into ("https://host:port", "/v1").
std::pair<std::string, std::string> split_base_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) raise(ErrorCode::InvalidConfig, "agent base_url lacks a scheme: " + url);
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") raise(ErrorCode::InvalidConfig, "unsupported scheme in " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, ""};
  auto path = url.substr(path_start);
  while (!path.empty() && path.back() == '/') path.pop_back();
  return {url.substr(0, path_start), path};
}

bool retryable(int status) { return status == 429 || status >= 500; }

}  // namespace

std::string build_chat_body(const AgentEndpoint& endpoint, const ChatRequest& request) {
  ordered_json content = ordered_json::array();
  for (const auto& image : request.images) {
    if (image.uri.empty()) continue;
    content.push_back({{"type", "image_url"}, {"image_url", {{"url", image_url(image)}}}});
  }
  content.push_back({{"type", "text"}, {"text", request.prompt}});
  ordered_json body;
  body["model"] = endpoint.model;
  body["messages"] = ordered_json::array({{{"role", "user"}, {"content", content}}});
  body["temperature"] = endpoint.temperature;
  return body.dump();
}

std::string parse_chat_response(const std::string& body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::AgentUnavailable, std::string("malformed agent response: ") + e.what());
  }
  if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
    raise(ErrorCode::EmptyResponse, "agent response has no choices");
  }
  const auto& message = j["choices"][0].value("message", nlohmann::json::object());
  const auto it = message.find("content");
  if (it == message.end() || it->is_null()) raise(ErrorCode::EmptyResponse, "agent response has no content");
  if (it->is_string()) return it->get<std::string>();
  if (it->is_array()) {
    std::string text;
    for (const auto& part : *it) {
      if (part.is_object() && part.value("type", "") == "text") text += part.value("text", "");
    }
    return text;
  }
  raise(ErrorCode::AgentUnavailable, "agent response content has unexpected type");
}

HttpAgent::HttpAgent(AgentEndpoint endpoint) : endpoint_(std::move(endpoint)) {
  validate_endpoint(endpoint_);
  std::tie(origin_, path_) = split_base_url(endpoint_.base_url);
  path_ += "/chat/completions";
}

std::string HttpAgent::complete(const ChatRequest& request) {
  const auto body = build_chat_body(endpoint_, request);
  const auto secs = static_cast<time_t>(endpoint_.timeout_seconds);
  const auto usecs = static_cast<time_t>((endpoint_.timeout_seconds - static_cast<double>(secs)) * 1e6);

  std::string last_error;
  int attempts = 0;
  for (int attempt = 0; attempt <= endpoint_.max_retries; ++attempt) {
    ++attempts;
    if (attempt > 0) std::this_thread::sleep_for(endpoint_.retry_backoff * attempt);

    httplib::Client client(origin_);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    httplib::Headers headers;
    if (!endpoint_.api_key.empty()) headers.emplace("Authorization", "Bearer " + endpoint_.api_key);

    auto res = client.Post(path_, headers, body, "application/json");
    if (!res) {
      last_error = "request failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) return parse_chat_response(res->body);
    last_error = "HTTP " + std::to_string(res->status);
    if (!retryable(res->status)) break;
  }
  raise(ErrorCode::AgentUnavailable, "agent at " + endpoint_.base_url + " unavailable after " +
                                         std::to_string(attempts) + " attempt(s): " + last_error);
}

}  // namespace lirlab::curation
