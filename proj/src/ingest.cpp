#include "flowtok/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>

#include "flowtok/csv.hpp"
#include "flowtok/error.hpp"

namespace flowtok {

std::optional<std::size_t> RawTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

RawTable load_csv(std::span<const std::filesystem::path> paths,
                  const SchemaConfig& schema) {
  RawTable table;
  table.header.push_back(schema.timestamp_column);
  for (const ColumnSpec& c : schema.columns) {
    if (!c.derived) table.header.push_back(c.name);
  }

  std::vector<std::string> first_header;
  std::vector<std::size_t> source_index;  // table column -> file column
  std::vector<std::string> row;
  std::size_t row_index = 0;

  for (std::size_t f = 0; f < paths.size(); ++f) {
    const auto& path = paths[f];
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    CsvReader reader(in, path.string());

    std::vector<std::string> header;
    if (!reader.next(header)) {
      throw HeaderMismatchError(path.string() + ": missing header row");
    }
    if (f == 0) {
      first_header = header;
      for (const std::string& name : table.header) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
          throw HeaderMismatchError(path.string() + ": column '" + name +
                                    "' required by the schema is missing");
        }
        source_index.push_back(static_cast<std::size_t>(it - header.begin()));
      }
    } else if (header != first_header) {
      throw HeaderMismatchError(path.string() + ": header differs from '" +
                                paths[0].string() + "'");
    }

    while (reader.next(row)) {
      if (row.size() != first_header.size()) {
        throw CsvDialectError(path.string() + ":" +
                              std::to_string(reader.line()) + ": row " +
                              std::to_string(row_index) + " has " +
                              std::to_string(row.size()) + " cells, expected " +
                              std::to_string(first_header.size()));
      }
      for (std::size_t src : source_index) {
        table.cells.push_back(std::move(row[src]));
      }
      ++row_index;
    }
    if (in.bad()) throw IoError("error reading '" + path.string() + "'");
  }
  return table;
}

namespace {

std::vector<Timestamp> parse_timestamps(const RawTable& table,
                                        std::string_view column,
                                        const TimestampFormat& format) {
  auto col = table.column(column);
  if (!col) {
    throw HeaderMismatchError("timestamp column '" + std::string(column) +
                              "' not present in table");
  }
  std::vector<Timestamp> out;
  out.reserve(table.rows());
  for (std::size_t i = 0; i < table.rows(); ++i) {
    const std::string& cell = table.row(i)[*col];
    auto ts = format.parse(cell);
    if (!ts) {
      throw TimestampParseError("row " + std::to_string(i) + ": '" + cell +
                                "' does not match timestamp format '" +
                                format.pattern() + "'");
    }
    out.push_back(*ts);
  }
  return out;
}

}  // namespace

RawTable sort_chronological(RawTable table, std::string_view timestamp_column,
                            const TimestampFormat& format) {
  std::vector<Timestamp> ts = parse_timestamps(table, timestamp_column, format);
  if (std::is_sorted(ts.begin(), ts.end())) return table;

  std::vector<std::size_t> order(ts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return ts[a] < ts[b]; });

  const std::size_t w = table.width();
  std::vector<std::string> sorted;
  sorted.reserve(table.cells.size());
  for (std::size_t src : order) {
    for (std::size_t k = 0; k < w; ++k) {
      sorted.push_back(std::move(table.cells[src * w + k]));
    }
  }
  table.cells = std::move(sorted);
  return table;
}

std::string render_seconds(double seconds) {
  if (std::isnan(seconds)) return std::string(kMissingDelta);
  char buf[400];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), seconds,
                                 std::chars_format::fixed);
  std::string out(buf, end);
  if (out.find('.') == std::string::npos) out += ".0";
  return out;
}

std::optional<std::string> canonical_integer(std::string_view cell) {
  std::string_view digits = cell;
  std::size_t dot = cell.find('.');
  if (dot != std::string_view::npos) {
    std::string_view frac = cell.substr(dot + 1);
    if (frac.find_first_not_of('0') != std::string_view::npos) return std::nullopt;
    digits = cell.substr(0, dot);
  }
  if (!digits.empty() && digits.front() == '+') digits.remove_prefix(1);
  if (digits.empty() || digits == "-") return std::nullopt;

  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
    return std::nullopt;
  }
  return std::to_string(v);
}

std::vector<FlowRecord> engineer_delta_time(const RawTable& table,
                                            const SchemaConfig& schema) {
  TimestampFormat format(schema.timestamp_format);
  std::vector<Timestamp> ts =
      parse_timestamps(table, schema.timestamp_column, format);

  // Schema column -> table column (npos for the derived one).
  constexpr std::size_t kDerived = static_cast<std::size_t>(-1);
  std::vector<std::size_t> source(schema.columns.size(), kDerived);
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    if (schema.columns[c].derived) continue;
    auto idx = table.column(schema.columns[c].name);
    if (!idx) {
      throw HeaderMismatchError("column '" + schema.columns[c].name +
                                "' not present in table");
    }
    source[c] = *idx;
  }

  std::vector<FlowRecord> records;
  records.reserve(table.rows());
  for (std::size_t i = 0; i < table.rows(); ++i) {
    auto row = table.row(i);
    FlowRecord rec;
    rec.values.reserve(schema.columns.size());
    for (std::size_t c = 0; c < schema.columns.size(); ++c) {
      const ColumnSpec& col = schema.columns[c];
      if (col.derived) {
        if (i == 0) {
          rec.values.emplace_back(kMissingDelta);
          continue;
        }
        std::int64_t delta = ts[i].nanos - ts[i - 1].nanos;
        if (delta < 0) {
          throw NegativeDeltaError("row " + std::to_string(i) +
                                   " precedes row " + std::to_string(i - 1) +
                                   "; input is not chronologically sorted");
        }
        rec.values.push_back(render_seconds(static_cast<double>(delta) / 1e9));
        continue;
      }
      const std::string& cell = row[source[c]];
      if (col.integer) {
        auto canon = canonical_integer(cell);
        if (!canon) {
          throw IntegerCoercionError("row " + std::to_string(i) + ", column '" +
                                     col.name + "': '" + cell +
                                     "' is not an integer");
        }
        rec.values.push_back(std::move(*canon));
      } else {
        rec.values.push_back(cell);
      }
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<FlowRecord> prepare_records(
    std::span<const std::filesystem::path> paths, const SchemaConfig& schema,
    PrepareSummary* summary) {
  TimestampFormat format(schema.timestamp_format);
  RawTable table = sort_chronological(load_csv(paths, schema),
                                      schema.timestamp_column, format);
  std::vector<FlowRecord> records = engineer_delta_time(table, schema);
  if (summary != nullptr) {
    summary->rows = records.size();
    if (table.rows() > 0) {
      auto col = *table.column(schema.timestamp_column);
      summary->first = format.parse(table.row(0)[col]);
      summary->last = format.parse(table.row(table.rows() - 1)[col]);
    }
  }
  return records;
}

}  // namespace flowtok
