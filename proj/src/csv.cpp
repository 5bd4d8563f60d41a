#include "agglom/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "agglom/error.hpp"

namespace agglom::csv {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<Row> read(const std::filesystem::path& path,
                      const std::vector<std::string>& expected_header) {
  std::ifstream in(path);
  if (!in) fail_input("cannot open file: " + path.string());

  std::vector<Row> rows;
  std::string line;
  std::size_t lineno = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    for (auto& f : fields) f = trim(f);
    if (!saw_header) {
      if (fields != expected_header) {
        std::ostringstream want;
        for (std::size_t i = 0; i < expected_header.size(); ++i)
          want << (i ? "," : "") << expected_header[i];
        fail_input(path.string() + ": expected header '" + want.str() + "' at line " +
                   std::to_string(lineno));
      }
      saw_header = true;
      continue;
    }
    if (fields.size() != expected_header.size())
      fail_input(path.string() + ": malformed row at line " + std::to_string(lineno) +
                 " (expected " + std::to_string(expected_header.size()) + " fields, got " +
                 std::to_string(fields.size()) + ")");
    rows.push_back(Row{std::move(fields), lineno});
  }
  if (!saw_header) fail_input(path.string() + ": empty file (missing header)");
  return rows;
}

double parse_number(const std::string& field, const std::filesystem::path& path,
                    std::size_t line) {
  if (field.empty())
    fail_input(path.string() + ": malformed row at line " + std::to_string(line) +
               " (empty numeric field)");
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(field.c_str(), &end);
  if (errno != 0 || end == field.c_str() || *end != '\0')
    fail_input(path.string() + ": malformed row at line " + std::to_string(line) +
               " (not a number: '" + field + "')");
  return v;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail_input("cannot write file: " + path.string());
  out << content;
  if (!out) fail_input("write failed: " + path.string());
}

}  // namespace agglom::csv
