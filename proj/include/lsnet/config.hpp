#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lsnet::config {

/// A registered configuration key and its default (empty means unset).
struct KeySpec {
  std::string key;
  std::string default_value;
  std::string help;
};

const std::vector<KeySpec>& registry();

inline constexpr const char* kEnvPrefix = "LSNET_";
/// "fit.eta" -> "LSNET_FIT_ETA"
std::string env_name(const std::string& key);

/// Flat dotted-key configuration. Layers, lowest precedence first: registry
/// defaults, config file, LSNET_* environment variables, explicit overrides.
class Config {
public:
  Config();

  /// Lines of `key = value`; '#' starts a comment; `[section]` headers prefix
  /// the following keys with "section.".
  void load_file(const std::filesystem::path& path);
  void load_string(const std::string& text, const std::string& origin = "<string>");
  void apply_env();
  void set(const std::string& key, const std::string& value);
  /// "key=value"
  void set_assignment(const std::string& assignment);

  bool has(const std::string& key) const;  // set and non-empty
  std::string get(const std::string& key) const;
  std::optional<std::string> get_optional(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::optional<double> get_optional_double(const std::string& key) const;
  long long get_int(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key) const;
  std::vector<long long> get_int_list(const std::string& key) const;

  /// All keys in sorted order with their effective values.
  const std::map<std::string, std::string>& values() const { return values_; }

private:
  void require_known(const std::string& key) const;
  std::map<std::string, std::string> values_;
};

}  // namespace lsnet::config
