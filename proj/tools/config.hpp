#pragma once

// Run configuration: typed keys resolved from defaults, a JSON file,
// WOMBLE_* environment variables and command-line flags, in increasing
// precedence.

#include <json.hpp>

#include <set>
#include <string>
#include <vector>

namespace womble::cli {

enum class KeyType { boolean, integer, unsigned_integer, number, text, number_list };

struct KeySpec {
  std::string name;  // JSON key; flag is --name with '_' -> '-', env is WOMBLE_NAME
  KeyType type;
  nlohmann::json fallback;  // null when the key has no default
  std::string help;
};

const std::vector<KeySpec>& key_specs();

std::string flag_name(const std::string& key);
std::string env_name(const std::string& key);

/// Parses a textual value (flag or environment) into the key's type.
nlohmann::json parse_value(const KeySpec& spec, const std::string& text);

class RunConfig {
 public:
  /// Defaults only.
  RunConfig();

  void merge_file(const std::string& path);
  void merge_environment();
  void set(const std::string& key, const std::string& text);

  const nlohmann::json& values() const { return values_; }
  bool provided(const std::string& key) const { return provided_.count(key) > 0; }
  bool has(const std::string& key) const { return !values_.at(key).is_null(); }

  bool flag(const std::string& key) const { return values_.at(key).get<bool>(); }
  long integer(const std::string& key) const { return values_.at(key).get<long>(); }
  double number(const std::string& key) const { return values_.at(key).get<double>(); }
  std::string text(const std::string& key) const;
  std::vector<double> list(const std::string& key) const { return values_.at(key).get<std::vector<double>>(); }

  /// Requires a non-null value.
  std::string require_text(const std::string& key) const;

  void assign(const std::string& key, nlohmann::json value);

 private:
  const KeySpec& spec(const std::string& key) const;
  nlohmann::json values_;
  std::set<std::string> provided_;
};

/// 64-bit FNV-1a, printed as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);
std::uint64_t fnv1a(const std::string& bytes);

}  // namespace womble::cli
