#include "flowtok/csv.hpp"

#include "flowtok/error.hpp"

namespace flowtok {

CsvReader::CsvReader(std::istream& in, std::string source_name)
    : buf_(in.rdbuf()), source_(std::move(source_name)) {}

void CsvReader::fail(const std::string& what) const {
  throw CsvDialectError(source_ + ":" + std::to_string(line_) + ": " + what);
}

bool CsvReader::next(std::vector<std::string>& row) {
  constexpr int kEof = std::char_traits<char>::eof();
  row.clear();

  // Skip blank lines.
  for (;;) {
    int c = peek();
    if (c == kEof) return false;
    if (c == '\n') {
      get();
      continue;
    }
    if (c == '\r') {
      get();
      if (peek() == '\n') get();
      continue;
    }
    break;
  }
  record_line_ = line_;

  std::string cell;
  for (;;) {
    cell.clear();
    int c = peek();
    if (c == '"') {
      get();
      for (;;) {
        c = get();
        if (c == kEof) fail("unterminated quoted field");
        if (c == '"') {
          if (peek() == '"') {
            get();
            cell.push_back('"');
            continue;
          }
          break;
        }
        cell.push_back(static_cast<char>(c));
      }
      c = peek();
      if (c != ',' && c != '\n' && c != '\r' && c != kEof) {
        fail("unexpected character after closing quote");
      }
    } else {
      for (;;) {
        c = peek();
        if (c == ',' || c == '\n' || c == '\r' || c == kEof) break;
        if (c == '"') fail("quote inside unquoted field");
        cell.push_back(static_cast<char>(get()));
      }
    }
    row.push_back(std::move(cell));

    c = get();
    if (c == ',') continue;
    if (c == '\r' && peek() == '\n') get();
    return true;
  }
}

void append_csv_cell(std::string& out, std::string_view cell) {
  bool needs_quotes =
      cell.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs_quotes) {
    out.append(cell);
    return;
  }
  out.push_back('"');
  for (char c : cell) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

void CsvWriter::write_row(std::span<const std::string> cells) {
  scratch_.clear();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) scratch_.push_back(',');
    append_csv_cell(scratch_, cells[i]);
  }
  // A single empty cell would otherwise be an empty line, which readers skip.
  if (cells.size() == 1 && cells[0].empty()) scratch_ = "\"\"";
  scratch_.push_back('\n');
  out_.write(scratch_.data(), static_cast<std::streamsize>(scratch_.size()));
}

}  // namespace flowtok
