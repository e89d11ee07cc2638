#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace ensq {

// Flat "key = value" configuration with [section] headers. Full-line
// comments start with '#' or ';'. Lists are comma separated. No nesting.
class ConfigFile {
 public:
  static ConfigFile parse_file(const std::filesystem::path& path);
  static ConfigFile parse_string(std::string_view text, std::string origin = "<config>");

  bool has(const std::string& section, const std::string& key) const;

  std::string get_string(const std::string& section, const std::string& key) const;
  std::string get_string_or(const std::string& section, const std::string& key,
                            std::string fallback) const;
  double get_double(const std::string& section, const std::string& key) const;
  double get_double_or(const std::string& section, const std::string& key, double fallback) const;
  int get_int(const std::string& section, const std::string& key) const;
  int get_int_or(const std::string& section, const std::string& key, int fallback) const;
  std::uint64_t get_u64_or(const std::string& section, const std::string& key,
                           std::uint64_t fallback) const;
  bool get_bool_or(const std::string& section, const std::string& key, bool fallback) const;
  std::vector<double> get_double_list_or(const std::string& section, const std::string& key,
                                         std::vector<double> fallback) const;
  std::vector<int> get_int_list_or(const std::string& section, const std::string& key,
                                   std::vector<int> fallback) const;
  std::vector<std::uint64_t> get_u64_list_or(const std::string& section, const std::string& key,
                                             std::vector<std::uint64_t> fallback) const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::string full_key(const std::string& section, const std::string& key) const;
  const std::string& raw(const std::string& section, const std::string& key) const;

  std::map<std::string, std::string> values_;  // "section.key" -> value
  std::string origin_;
};

}  // namespace ensq
