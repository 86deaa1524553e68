#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace flowtok {

// Absolute instant, nanoseconds since the Unix epoch (UTC, no leap seconds).
struct Timestamp {
  std::int64_t nanos = 0;

  auto operator<=>(const Timestamp&) const = default;
};

// strftime-like pattern for the raw flow-start column.
//
//   %Y  four-digit year         %H  hour 00-23
//   %m  month 01-12             %M  minute 00-59
//   %d  day 01-31               %S  second 00-60
//   %f  fractional seconds: parses 1-9 digits, formats 3 (milliseconds)
//   %3f %6f %9f  fractional seconds with exactly that many digits
//   %%  literal percent
//
// Any other character must match literally.
class TimestampFormat {
 public:
  explicit TimestampFormat(std::string_view pattern);

  std::optional<Timestamp> parse(std::string_view text) const;
  std::string format(Timestamp ts) const;

  const std::string& pattern() const { return pattern_; }

 private:
  enum class Kind { kLiteral, kYear, kMonth, kDay, kHour, kMinute, kSecond, kFraction };
  struct Part {
    Kind kind;
    std::string literal;
    int digits = 0;  // fraction width; 0 means "1-9 on parse, 3 on format"
  };

  std::string pattern_;
  std::vector<Part> parts_;
};

}  // namespace flowtok
