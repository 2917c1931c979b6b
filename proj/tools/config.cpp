#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "lirlab/error.hpp"

namespace lirlab::cli {

const std::vector<SettingInfo>& setting_table() {
  static const std::vector<SettingInfo> table = {
      {"embeddings", "", "TEMB embedding store (curate, verify-bounds)"},
      {"queries", "", "TEMB store of composed-query embeddings (eval)"},
      {"candidates", "", "TEMB store of candidate embeddings (eval)"},
      {"annotations", "", "annotation JSONL (eval)"},
      {"triplets_out", "", "triplet JSONL output; default <out>/triplets.jsonl"},
      {"out", ".", "directory for reports"},
      {"seed", "0", "base random seed"},
      {"threads", "0", "worker count, 0 = one per hardware thread"},
      {"ks", "1,5,10,50", "recall / mAP cutoffs"},
      {"subset_ks", "1,2,3", "subset recall cutoffs"},
      {"mining.q1", "51", "first rank of the target window", true},
      {"mining.q2", "60", "last rank of the target window", true},
      {"mining.allow_reuse", "true", "allow one image to be the target of several references"},
      {"mining.failure_policy", "abort", "abort | skip on a per-reference agent failure"},
      {"curate.protocol", "two_step", "two_step | direct"},
      {"agent.mode", "mock", "mock | live"},
      {"agent.base_url", "", "chat-completion base URL, e.g. https://host/v1"},
      {"agent.model", "", "model name sent to the endpoint"},
      {"agent.api_key_env", "AGENT_API_KEY", "environment variable holding the API key"},
      {"agent.timeout", "60", "per-request timeout in seconds"},
      {"agent.max_retries", "3", "retries after a failed request"},
      {"agent.retry_backoff_ms", "500", "linear backoff between retries"},
      {"agent.temperature", "0.2", "sampling temperature"},
      {"agent.max_in_flight", "4", "concurrent agent requests"},
      {"agent.images_dir", "", "directory holding images named by id"},
      {"prompts.caption", "", "file overriding the captioning prompt"},
      {"prompts.modification", "", "file overriding the caption-based modification prompt ({cap1}, {cap2})"},
      {"prompts.direct", "", "file overriding the direct modification prompt"},
      {"loss.tau", "0.1", "InfoNCE temperature for verify-bounds"},
      {"bounds.n", "128", "batch size N for verify-bounds", true},
      {"bounds.p", "4", "tokens per item for verify-bounds"},
      {"bounds.d", "16", "dimension for verify-bounds"},
      {"bounds.noise", "0.01", "noise added to permuted target tokens"},
      {"collapse.m", "8", "items M"},
      {"collapse.p", "1", "tokens per item"},
      {"collapse.d", "8", "dimension"},
      {"collapse.tau", "0.1", "temperature"},
      {"collapse.steps", "5000", "ascent iterations"},
      {"collapse.step_size", "0.5", "step (initial trial step for armijo)"},
      {"collapse.step_rule", "armijo", "armijo | constant"},
      {"collapse.tie_v_to_u", "false", "share parameters between U and V"},
      {"collapse.threshold", "0.01", "pass threshold for etf and alignment errors"},
      {"collapse.trace_csv", "", "optional per-step CSV trace"},
      {"bench.n", "256", "items in the benchmark corpus"},
      {"bench.p", "8", "tokens per item"},
      {"bench.d", "64", "dimension"},
      {"bench.repeats", "3", "timed repetitions (best is reported)"},
      {"synth.n", "200", "items"},
      {"synth.p", "4", "tokens per item"},
      {"synth.d", "16", "dimension"},
      {"synth.clusters", "0", "cluster count, 0 = unclustered"},
      {"synth.noise", "0.3", "noise scale around cluster centroids"},
      {"synth.output", "", "TEMB output path; default <out>/synthetic.temb"},
  };
  return table;
}

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = [] {
    std::set<std::string> k;
    for (const auto& s : setting_table()) k.insert(s.key);
    return k;
  }();
  return keys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void check_key(const std::string& key, const std::string& where) {
  if (!known_keys().count(key)) raise(ErrorCode::InvalidConfig, "unknown config key '" + key + "' in " + where);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    raise(ErrorCode::InvalidConfig, "config key '" + key + "' expects a number, got '" + text + "'");
  }
  return value;
}

}  // namespace

std::string env_var_for(const std::string& key) {
  std::string out = "LIRLAB_";
  for (char c : key) out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      raise(ErrorCode::InvalidConfig, "config line " + std::to_string(lineno) + " lacks '='");
    }
    const auto key = trim(line.substr(0, eq));
    check_key(key, "config line " + std::to_string(lineno));
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoError, "cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
  };
}

Settings Settings::resolve(const std::optional<std::filesystem::path>& config_file, const EnvLookup& env,
                           const std::map<std::string, std::string>& flags) {
  Settings s;
  for (const auto& info : setting_table()) s.values_[info.key] = Setting{info.default_value, Source::builtin};
  if (config_file) {
    for (const auto& [k, v] : load_config_file(*config_file)) s.values_[k] = Setting{v, Source::file};
  }
  if (env) {
    for (const auto& info : setting_table()) {
      if (auto v = env(env_var_for(info.key))) s.values_[info.key] = Setting{*v, Source::env};
    }
  }
  for (const auto& [k, v] : flags) {
    check_key(k, "command-line flags");
    s.values_[k] = Setting{v, Source::flag};
  }
  return s;
}

const std::string& Settings::str(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) raise(ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
  return it->second.value;
}

Source Settings::source(const std::string& key) const {
  str(key);
  return values_.at(key).source;
}

std::uint64_t Settings::u64(const std::string& key) const { return parse_number<std::uint64_t>(key, str(key)); }

std::size_t Settings::size(const std::string& key) const { return parse_number<std::size_t>(key, str(key)); }

double Settings::real(const std::string& key) const {
  const auto& text = str(key);
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    raise(ErrorCode::InvalidConfig, "config key '" + key + "' expects a real number, got '" + text + "'");
  }
}

bool Settings::boolean(const std::string& key) const {
  auto v = str(key);
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  raise(ErrorCode::InvalidConfig, "config key '" + key + "' expects a boolean, got '" + str(key) + "'");
}

std::vector<std::size_t> Settings::cutoffs(const std::string& key) const {
  std::vector<std::size_t> out;
  std::istringstream in(str(key));
  std::string part;
  while (std::getline(in, part, ',')) {
    part = trim(part);
    if (part.empty()) continue;
    const auto k = parse_number<std::size_t>(key, part);
    if (k == 0) raise(ErrorCode::InvalidConfig, "config key '" + key + "' has a zero cutoff");
    out.push_back(k);
  }
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end()) {
    raise(ErrorCode::InvalidConfig, "config key '" + key + "' repeats a cutoff");
  }
  return out;
}

std::optional<std::filesystem::path> Settings::path(const std::string& key) const {
  const auto& v = str(key);
  if (v.empty()) return std::nullopt;
  return std::filesystem::path(v);
}

}  // namespace lirlab::cli
