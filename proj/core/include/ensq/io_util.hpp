#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ensq {

// Shortest decimal string that parses back to exactly the same double.
// All text artifacts (datasets, histories, reports, score files) go through
// this so that a rerun with the same config is byte-identical.
std::string format_double(double v);

// Strict double parse of the whole token. `context` names the file/line for
// the error message.
double parse_double(std::string_view token, const std::string& context);

std::string read_file(const std::filesystem::path& path);

// write-temp-then-rename
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Score file: one record per line, "id<TAB>score".
using ScoreRecord = std::pair<std::string, double>;
std::vector<ScoreRecord> load_score_file(const std::filesystem::path& path);
void save_score_file(const std::vector<ScoreRecord>& records, const std::filesystem::path& path);

// Report file: one line per metric, "name<TAB>value".
void save_report_file(const std::vector<std::pair<std::string, std::string>>& lines,
                      const std::filesystem::path& path);

}  // namespace ensq
