#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flowtok/record.hpp"
#include "flowtok/schema.hpp"
#include "flowtok/timestamp.hpp"

namespace flowtok {

// Row-major cell table aggregated from one or more CSV files.
//
// Only the columns the schema needs are retained: the timestamp column
// first, then every non-derived schema column in schema order.
struct RawTable {
  std::vector<std::string> header;
  std::vector<std::string> cells;

  std::size_t width() const { return header.size(); }
  std::size_t rows() const { return width() == 0 ? 0 : cells.size() / width(); }
  std::span<const std::string> row(std::size_t i) const {
    return {cells.data() + i * width(), width()};
  }
  std::optional<std::size_t> column(std::string_view name) const;
};

// Concatenates the files in path order. All files must share an identical
// header and contain every column the schema references.
RawTable load_csv(std::span<const std::filesystem::path> paths,
                  const SchemaConfig& schema);

// Stable sort on the parsed timestamp column; equal instants keep their
// input order.
RawTable sort_chronological(RawTable table, std::string_view timestamp_column,
                            const TimestampFormat& format);

// Builds prepared records from a chronologically sorted table: drops the
// timestamp, inserts the inter-arrival seconds ("nan" for the first row)
// at the schema's delta position and canonicalizes integer columns.
std::vector<FlowRecord> engineer_delta_time(const RawTable& table,
                                            const SchemaConfig& schema);

// Shortest decimal that round-trips `seconds`, always with a fractional
// digit: 0 -> "0.0", 1 -> "1.0", 0.25 -> "0.25".
std::string render_seconds(double seconds);

inline constexpr std::string_view kMissingDelta = "nan";

// Canonical integer text for `cell`, accepting integral decimals such as
// "443.0". Returns nullopt for anything else.
std::optional<std::string> canonical_integer(std::string_view cell);

struct PrepareSummary {
  std::size_t rows = 0;
  std::optional<Timestamp> first;
  std::optional<Timestamp> last;
};

// load_csv + sort_chronological + engineer_delta_time.
std::vector<FlowRecord> prepare_records(
    std::span<const std::filesystem::path> paths, const SchemaConfig& schema,
    PrepareSummary* summary = nullptr);

}  // namespace flowtok
