#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace flowtok {

// Streaming RFC 4180 reader: comma separated, '"' quoting with "" escapes,
// LF or CRLF record ends. Cells are returned byte-exact; nothing is
// trimmed. Lines that are completely empty are skipped.
class CsvReader {
 public:
  CsvReader(std::istream& in, std::string source_name);

  // Reads the next record into `row`. Returns false at end of input.
  // Throws CsvDialectError on an unterminated quote or stray quote.
  bool next(std::vector<std::string>& row);

  // 1-based physical line where the last returned record started.
  std::size_t line() const { return record_line_; }
  const std::string& source() const { return source_; }

 private:
  int get() {
    int c = buf_->sbumpc();
    if (c == '\n') ++line_;
    return c;
  }
  int peek() { return buf_->sgetc(); }
  [[noreturn]] void fail(const std::string& what) const;

  std::streambuf* buf_;
  std::string source_;
  std::size_t line_ = 1;
  std::size_t record_line_ = 0;
};

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void write_row(std::span<const std::string> cells);

 private:
  std::ostream& out_;
  std::string scratch_;
};

// Appends `cell` to `out` with RFC 4180 quoting applied when needed.
void append_csv_cell(std::string& out, std::string_view cell);

}  // namespace flowtok
