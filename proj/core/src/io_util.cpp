#include "ensq/io_util.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace ensq {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view token, const std::string& context) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last || token.empty()) {
    throw std::runtime_error(context + ": not a number: '" + std::string(token) + "'");
  }
  return v;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::vector<ScoreRecord> load_score_file(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::vector<ScoreRecord> records;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    ++lineno;
    pos = end + 1;
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    const std::string context = path.string() + ":" + std::to_string(lineno);
    if (tab == std::string_view::npos) {
      throw std::runtime_error(context + ": expected 'id<TAB>score'");
    }
    records.emplace_back(std::string(line.substr(0, tab)),
                         parse_double(line.substr(tab + 1), context));
  }
  return records;
}

void save_score_file(const std::vector<ScoreRecord>& records, const std::filesystem::path& path) {
  std::string out;
  for (const auto& [id, score] : records) {
    out += id;
    out += '\t';
    out += format_double(score);
    out += '\n';
  }
  write_file_atomic(path, out);
}

void save_report_file(const std::vector<std::pair<std::string, std::string>>& lines,
                      const std::filesystem::path& path) {
  std::string out;
  for (const auto& [name, value] : lines) {
    out += name;
    out += '\t';
    out += value;
    out += '\n';
  }
  write_file_atomic(path, out);
}

}  // namespace ensq
