#include "areal/csv.hpp"

#include "areal/error.hpp"
#include "areal/io.hpp"

namespace areal {

std::size_t CsvTable::col(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw ValidationError("csv: required column '" + name + "' not found in header");
}

CsvTable parse_csv(const std::string& text, const std::string& origin) {
  CsvTable out;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool row_started = false;
  bool seen_header = false;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
  };
  auto end_record = [&] {
    end_field();
    if (!seen_header) {
      out.header = std::move(record);
      seen_header = true;
    } else {
      out.rows.push_back(std::move(record));
    }
    record.clear();
    row_started = false;
  };

  const std::size_t n = text.size();
  for (std::size_t i = 0; i < n; ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < n && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty()) {
          throw ValidationError(origin + ": stray quote inside unquoted field");
        }
        in_quotes = true;
        row_started = true;
        break;
      case ',':
        end_field();
        row_started = true;
        break;
      case '\r':
        if (i + 1 < n && text[i + 1] == '\n') ++i;
        end_record();
        break;
      case '\n':
        end_record();
        break;
      default:
        field += c;
        row_started = true;
        break;
    }
  }
  if (in_quotes) throw ValidationError(origin + ": unterminated quoted field");
  if (row_started || !field.empty() || !record.empty()) end_record();

  if (!seen_header || out.header.empty()) {
    throw ValidationError(origin + ": missing header row");
  }
  return out;
}

CsvTable read_csv(const std::filesystem::path& path) {
  return parse_csv(read_file(path), path.string());
}

namespace {

void append_field(std::string& out, const std::string& f) {
  if (f.find_first_of(",\"\n\r") == std::string::npos) {
    out += f;
    return;
  }
  out += '"';
  for (const char c : f) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
}

void append_row(std::string& out, const std::vector<std::string>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out += ',';
    append_field(out, row[i]);
  }
  out += '\n';
}

}  // namespace

std::string to_csv(const std::vector<std::string>& header,
                   const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  append_row(out, header);
  for (const auto& row : rows) append_row(out, row);
  return out;
}

}  // namespace areal
