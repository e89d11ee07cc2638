#include "ensq/config.hpp"

#include <charconv>
#include <stdexcept>

#include "ensq/io_util.hpp"

namespace ensq {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string> split_list(std::string_view value) {
  std::vector<std::string> items;
  std::size_t pos = 0;
  while (pos <= value.size()) {
    std::size_t next = value.find(',', pos);
    if (next == std::string_view::npos) next = value.size();
    const std::string_view item = trim(value.substr(pos, next - pos));
    if (!item.empty()) items.emplace_back(item);
    pos = next + 1;
  }
  return items;
}

}  // namespace

ConfigFile ConfigFile::parse_file(const std::filesystem::path& path) {
  return parse_string(read_file(path), path.string());
}

ConfigFile ConfigFile::parse_string(std::string_view text, std::string origin) {
  ConfigFile config;
  config.origin_ = std::move(origin);
  std::string section;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(pos, end - pos));
    ++lineno;
    pos = end + 1;
    if (end == text.size() && line.empty()) break;
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;

    const std::string context = config.origin_ + ":" + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw std::runtime_error(context + ": malformed section header");
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw std::runtime_error(context + ": expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw std::runtime_error(context + ": empty key");
    const std::string value(trim(line.substr(eq + 1)));
    const std::string full = section.empty() ? key : section + "." + key;
    if (config.values_.contains(full)) {
      throw std::runtime_error(context + ": duplicate key '" + full + "'");
    }
    config.values_[full] = value;
  }
  return config;
}

std::string ConfigFile::full_key(const std::string& section, const std::string& key) const {
  return section.empty() ? key : section + "." + key;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  return values_.contains(full_key(section, key));
}

const std::string& ConfigFile::raw(const std::string& section, const std::string& key) const {
  const auto it = values_.find(full_key(section, key));
  if (it == values_.end()) {
    throw std::runtime_error(origin_ + ": missing key '" + full_key(section, key) + "'");
  }
  return it->second;
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key) const {
  return raw(section, key);
}

std::string ConfigFile::get_string_or(const std::string& section, const std::string& key,
                                      std::string fallback) const {
  return has(section, key) ? raw(section, key) : std::move(fallback);
}

double ConfigFile::get_double(const std::string& section, const std::string& key) const {
  return parse_double(raw(section, key), origin_ + " [" + full_key(section, key) + "]");
}

double ConfigFile::get_double_or(const std::string& section, const std::string& key,
                                 double fallback) const {
  return has(section, key) ? get_double(section, key) : fallback;
}

int ConfigFile::get_int(const std::string& section, const std::string& key) const {
  const std::string& value = raw(section, key);
  int v = 0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size() || value.empty()) {
    throw std::runtime_error(origin_ + " [" + full_key(section, key) + "]: not an integer: '" +
                             value + "'");
  }
  return v;
}

int ConfigFile::get_int_or(const std::string& section, const std::string& key,
                           int fallback) const {
  return has(section, key) ? get_int(section, key) : fallback;
}

std::uint64_t ConfigFile::get_u64_or(const std::string& section, const std::string& key,
                                     std::uint64_t fallback) const {
  if (!has(section, key)) return fallback;
  const std::string& value = raw(section, key);
  std::uint64_t v = 0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size() || value.empty()) {
    throw std::runtime_error(origin_ + " [" + full_key(section, key) +
                             "]: not an unsigned integer: '" + value + "'");
  }
  return v;
}

bool ConfigFile::get_bool_or(const std::string& section, const std::string& key,
                             bool fallback) const {
  if (!has(section, key)) return fallback;
  const std::string& value = raw(section, key);
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw std::runtime_error(origin_ + " [" + full_key(section, key) + "]: not a boolean: '" +
                           value + "'");
}

std::vector<double> ConfigFile::get_double_list_or(const std::string& section,
                                                   const std::string& key,
                                                   std::vector<double> fallback) const {
  if (!has(section, key)) return fallback;
  std::vector<double> out;
  for (const std::string& item : split_list(raw(section, key))) {
    out.push_back(parse_double(item, origin_ + " [" + full_key(section, key) + "]"));
  }
  return out;
}

std::vector<int> ConfigFile::get_int_list_or(const std::string& section, const std::string& key,
                                             std::vector<int> fallback) const {
  if (!has(section, key)) return fallback;
  std::vector<int> out;
  for (const std::string& item : split_list(raw(section, key))) {
    int v = 0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (res.ec != std::errc() || res.ptr != item.data() + item.size()) {
      throw std::runtime_error(origin_ + " [" + full_key(section, key) + "]: not an integer: '" +
                               item + "'");
    }
    out.push_back(v);
  }
  return out;
}

std::vector<std::uint64_t> ConfigFile::get_u64_list_or(const std::string& section,
                                                       const std::string& key,
                                                       std::vector<std::uint64_t> fallback) const {
  if (!has(section, key)) return fallback;
  std::vector<std::uint64_t> out;
  for (const std::string& item : split_list(raw(section, key))) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (res.ec != std::errc() || res.ptr != item.data() + item.size()) {
      throw std::runtime_error(origin_ + " [" + full_key(section, key) +
                               "]: not an unsigned integer: '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace ensq
