#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace areal {

// A parsed delimited file: one header row plus zero or more records, all
// fields unescaped. Parsing follows RFC 4180 quoting (quoted fields may
// contain commas, doubled quotes, and newlines); both \n and \r\n row
// terminators are accepted.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Column index lookup; throws ValidationError naming the column if absent.
  std::size_t col(const std::string& name) const;
};

CsvTable parse_csv(const std::string& text, const std::string& origin);
CsvTable read_csv(const std::filesystem::path& path);

// Serializes with minimal quoting: a field is quoted only when it contains a
// comma, quote, or newline. Rows end with \n.
std::string to_csv(const std::vector<std::string>& header,
                   const std::vector<std::vector<std::string>>& rows);

}  // namespace areal
