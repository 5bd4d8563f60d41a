#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace agglom::csv {

struct Row {
  std::vector<std::string> fields;
  std::size_t line;  // 1-based line number in the file
};

// Reads a comma-separated file with a mandatory header row. The header must
// match `expected_header` exactly. Empty lines are skipped; every data row
// must have the same field count as the header. No quoting: ids in these
// schemas must not contain commas.
std::vector<Row> read(const std::filesystem::path& path,
                      const std::vector<std::string>& expected_header);

double parse_number(const std::string& field, const std::filesystem::path& path,
                    std::size_t line);

std::string format_number(double v);  // round-trip exact, locale independent

void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace agglom::csv
