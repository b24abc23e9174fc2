#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace eltd::csv {

/// Comma-separated table without quoting. Line numbers are 1-based and count the header.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;

  /// Index of a header column, or npos.
  [[nodiscard]] std::size_t column(std::string_view name) const noexcept;
};

inline constexpr std::size_t npos = static_cast<std::size_t>(-1);

std::vector<std::string> split(std::string_view line, char sep = ',');

/// Reads a whole file. Blank lines are skipped; a missing header is a ParseError.
Table read(const std::filesystem::path& path);
Table parse(std::string_view text, std::string_view source_name = "<memory>");

std::string read_file(const std::filesystem::path& path);
/// Writes atomically enough for our purposes: truncate + write + flush, throws on failure.
void write_file(const std::filesystem::path& path, std::string_view content);

/// Joins fields with ',' and appends '\n'.
std::string join_row(const std::vector<std::string>& fields);

}  // namespace eltd::csv
