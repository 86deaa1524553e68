#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace flowtok {

// Column families that share one learned merge list.
enum class BpeGroup : std::uint8_t {
  kIpAddress = 0,
  kPort = 1,
  kNumeric = 2,
};

inline constexpr std::size_t kNumGroups = 3;

// Training order is fixed: addresses, then ports, then everything numeric.
inline constexpr std::array<BpeGroup, kNumGroups> kAllGroups = {
    BpeGroup::kIpAddress, BpeGroup::kPort, BpeGroup::kNumeric};

constexpr std::size_t group_index(BpeGroup g) {
  return static_cast<std::size_t>(g);
}

// "ip", "port", "numeric"; the names used in schema and vocab files.
std::string_view group_name(BpeGroup g);
std::optional<BpeGroup> parse_group(std::string_view name);

struct CategoryValue {
  std::string value;  // cell string as it appears in the data
  std::string token;  // fixed token, e.g. "<TCP>"

  bool operator==(const CategoryValue&) const = default;
};

struct FixedCategorical {
  std::vector<CategoryValue> values;

  bool operator==(const FixedCategorical&) const = default;
};

struct Subword {
  BpeGroup group;

  bool operator==(const Subword&) const = default;
};

using TokenClass = std::variant<FixedCategorical, Subword>;

struct ColumnSpec {
  std::string name;              // CSV header name
  std::string structural_token;  // "<|SRCIP|>"
  TokenClass token_class;
  bool integer = false;  // cast to a canonical integer during preprocessing
  bool derived = false;  // engineered inter-arrival column, not read from CSV

  bool is_categorical() const {
    return std::holds_alternative<FixedCategorical>(token_class);
  }
  const FixedCategorical& categorical() const {
    return std::get<FixedCategorical>(token_class);
  }
  BpeGroup group() const { return std::get<Subword>(token_class).group; }

  bool operator==(const ColumnSpec&) const = default;
};

inline constexpr std::string_view kDefaultRowTerminator = "<|ROW|>";
inline constexpr std::string_view kDefaultTimestampFormat =
    "%Y-%m-%d %H:%M:%S.%f";

// Ordered column layout driving preprocessing, serialization and decoding.
//
// `columns` lists every field of a prepared record in serialization order,
// including the derived inter-arrival column (exactly one entry has
// `derived == true`). The raw timestamp column is consumed by preprocessing
// and never appears in `columns`.
struct SchemaConfig {
  std::vector<ColumnSpec> columns;
  std::string row_terminator{kDefaultRowTerminator};
  std::string timestamp_column;
  std::string timestamp_format{kDefaultTimestampFormat};

  std::size_t delta_index() const;
  const ColumnSpec& delta_column() const { return columns[delta_index()]; }
  std::optional<std::size_t> find_column(std::string_view name) const;

  bool operator==(const SchemaConfig&) const = default;
};

// Checks every schema invariant; throws ValidationError on the first
// violation found.
void validate_schema(const SchemaConfig& schema);

SchemaConfig parse_schema(std::string_view text,
                          std::string_view source_name = "<schema>");
SchemaConfig load_schema(const std::filesystem::path& path);

// Renders a schema in the same text format `parse_schema` accepts.
std::string format_schema(const SchemaConfig& schema);

// Token for a categorical value when the schema does not name one.
std::string default_category_token(std::string_view value);

}  // namespace flowtok
