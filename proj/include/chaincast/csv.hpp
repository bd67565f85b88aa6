#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace chaincast::csv {

// Minimal CSV support for the project's file contracts: UTF-8, LF line
// endings, '.' decimal separator, no quoting (all fields are dates or
// numbers). Parse errors carry 1-based line numbers.

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<long> line_numbers;  // source line per row
};

// Reads and validates against the expected header (exact order). Throws
// IngestError naming the missing/mismatched column.
Table read_file(const std::filesystem::path& path, const std::vector<std::string>& expected_header);

// Locale-independent field parsing; `what` names the column for diagnostics.
double parse_double(std::string_view field, long line, std::string_view what);
std::int64_t parse_int(std::string_view field, long line, std::string_view what);

// Shortest round-trip formatting via std::to_chars; deterministic.
std::string format_double(double v);

std::string join(const std::vector<std::string>& fields);

// Writes text to path atomically enough for our purposes (truncate + write).
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace chaincast::csv
