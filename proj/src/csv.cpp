#include "uba/csv.hpp"

#include <streambuf>

namespace uba {

bool CsvReader::next_row(std::vector<std::string>& row) {
  std::streambuf* buf = in_.rdbuf();
  row.clear();
  std::string field;
  bool in_quotes = false;
  bool saw_any = false;

  for (;;) {
    int ci = buf->sbumpc();
    if (ci == std::streambuf::traits_type::eof()) {
      if (in_quotes) throw CsvError("unterminated quoted field at end of input");
      if (!saw_any) return false;
      row.push_back(std::move(field));
      ++rows_read_;
      return true;
    }
    char c = static_cast<char>(ci);
    if (in_quotes) {
      if (c == '"') {
        int peek = buf->sgetc();
        if (peek == '"') {
          buf->sbumpc();
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        saw_any = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        saw_any = true;
        break;
      case '\r':
        break;  // swallowed; newline handling below
      case '\n':
        if (!saw_any && field.empty() && row.empty()) {
          break;  // blank line, keep scanning
        }
        row.push_back(std::move(field));
        ++rows_read_;
        return true;
      default:
        field.push_back(c);
        saw_any = true;
        break;
    }
  }
}

std::string csv_escape(std::string_view field) {
  bool needs_quote = false;
  for (char c : field) {
    if (c == ',' || c == '"' || c == '\n' || c == '\r') {
      needs_quote = true;
      break;
    }
  }
  if (!needs_quote) return std::string(field);
  std::string out;
  out.reserve(field.size() + 2);
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out.put(',');
    out << csv_escape(fields[i]);
  }
  out.put('\n');
}

}  // namespace uba
