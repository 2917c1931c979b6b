#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lirlab::cli {

struct SettingInfo {
  std::string key;
  std::string default_value;
  std::string help;
  /// The default reproduces a published experimental setting.
  bool published = false;
};

/// Every recognised configuration key with its built-in default.
const std::vector<SettingInfo>& setting_table();

/// Environment variable consulted for a key: LIRLAB_ + upper-cased key with
/// dots replaced by underscores (mining.q1 -> LIRLAB_MINING_Q1).
std::string env_var_for(const std::string& key);

/// Parses `key = value` lines; '#' starts a comment, blank lines are skipped.
/// Unknown keys and malformed lines raise InvalidConfig.
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> load_config_file(const std::filesystem::path& path);

enum class Source { builtin, file, env, flag };

struct Setting {
  std::string value;
  Source source = Source::builtin;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
EnvLookup process_env();

/// Merges the layers with precedence flag > environment > file > default.
class Settings {
 public:
  static Settings resolve(const std::optional<std::filesystem::path>& config_file, const EnvLookup& env,
                          const std::map<std::string, std::string>& flags);

  const std::string& str(const std::string& key) const;
  Source source(const std::string& key) const;
  std::uint64_t u64(const std::string& key) const;
  std::size_t size(const std::string& key) const;
  double real(const std::string& key) const;
  bool boolean(const std::string& key) const;
  std::vector<std::size_t> cutoffs(const std::string& key) const;
  std::optional<std::filesystem::path> path(const std::string& key) const;

 private:
  std::map<std::string, Setting> values_;
};

}  // namespace lirlab::cli
