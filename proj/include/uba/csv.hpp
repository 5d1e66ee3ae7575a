#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace uba {

struct CsvError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Minimal RFC 4180 reader. Quoted fields may contain commas, escaped quotes
// ("") and newlines. Rows are yielded one at a time; the source is never
// materialized, so memory stays flat for arbitrarily long files.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  // Fills `row` with the next record's fields. Returns false at end of input.
  // Blank lines are skipped. Throws CsvError on an unterminated quote.
  bool next_row(std::vector<std::string>& row);

  std::uint64_t rows_read() const { return rows_read_; }

 private:
  std::istream& in_;
  std::uint64_t rows_read_ = 0;
};

// Quotes a field if it contains a comma, quote, or newline.
std::string csv_escape(std::string_view field);

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace uba
