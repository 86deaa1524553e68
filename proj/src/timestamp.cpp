#include "flowtok/timestamp.hpp"

#include <chrono>

#include "flowtok/error.hpp"

namespace flowtok {

namespace {

constexpr std::int64_t kNanosPerSecond = 1'000'000'000;

bool read_digits(std::string_view text, std::size_t& pos, int count, int& out) {
  if (pos + count > text.size()) return false;
  int v = 0;
  for (int i = 0; i < count; ++i) {
    char c = text[pos + i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  pos += count;
  out = v;
  return true;
}

void append_padded(std::string& out, std::int64_t v, int width) {
  std::string digits = std::to_string(v);
  if (static_cast<int>(digits.size()) < width) {
    out.append(width - digits.size(), '0');
  }
  out += digits;
}

}  // namespace

TimestampFormat::TimestampFormat(std::string_view pattern) : pattern_(pattern) {
  std::string literal;
  auto flush = [&] {
    if (!literal.empty()) {
      parts_.push_back({Kind::kLiteral, literal, 0});
      literal.clear();
    }
  };
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    char c = pattern[i];
    if (c != '%') {
      literal.push_back(c);
      continue;
    }
    if (++i >= pattern.size()) {
      throw ValidationError("timestamp format '" + pattern_ +
                            "' ends with a bare '%'");
    }
    char spec = pattern[i];
    if (spec == '%') {
      literal.push_back('%');
      continue;
    }
    int width = 0;
    if (spec == '3' || spec == '6' || spec == '9') {
      if (i + 1 >= pattern.size() || pattern[i + 1] != 'f') {
        throw ValidationError("timestamp format '" + pattern_ +
                              "': width prefix only applies to %f");
      }
      width = spec - '0';
      spec = pattern[++i];
    }
    Kind kind;
    switch (spec) {
      case 'Y': kind = Kind::kYear; break;
      case 'm': kind = Kind::kMonth; break;
      case 'd': kind = Kind::kDay; break;
      case 'H': kind = Kind::kHour; break;
      case 'M': kind = Kind::kMinute; break;
      case 'S': kind = Kind::kSecond; break;
      case 'f': kind = Kind::kFraction; break;
      default:
        throw ValidationError("timestamp format '" + pattern_ +
                              "': unsupported conversion '%" + spec + "'");
    }
    flush();
    parts_.push_back({kind, {}, width});
  }
  flush();
}

std::optional<Timestamp> TimestampFormat::parse(std::string_view text) const {
  int year = 1970, month = 1, day = 1, hour = 0, minute = 0, second = 0;
  std::int64_t fraction = 0;
  std::size_t pos = 0;

  for (const Part& p : parts_) {
    bool ok = true;
    switch (p.kind) {
      case Kind::kLiteral:
        ok = text.substr(pos, p.literal.size()) == p.literal;
        pos += p.literal.size();
        break;
      case Kind::kYear: ok = read_digits(text, pos, 4, year); break;
      case Kind::kMonth: ok = read_digits(text, pos, 2, month); break;
      case Kind::kDay: ok = read_digits(text, pos, 2, day); break;
      case Kind::kHour: ok = read_digits(text, pos, 2, hour); break;
      case Kind::kMinute: ok = read_digits(text, pos, 2, minute); break;
      case Kind::kSecond: ok = read_digits(text, pos, 2, second); break;
      case Kind::kFraction: {
        int n = 0;
        std::int64_t v = 0;
        int max_digits = p.digits == 0 ? 9 : p.digits;
        while (pos < text.size() && n < max_digits && text[pos] >= '0' &&
               text[pos] <= '9') {
          v = v * 10 + (text[pos] - '0');
          ++pos;
          ++n;
        }
        ok = n > 0 && (p.digits == 0 || n == p.digits);
        for (int k = n; k < 9; ++k) v *= 10;
        fraction = v;
        break;
      }
    }
    if (!ok) return std::nullopt;
  }
  if (pos != text.size()) return std::nullopt;
  if (hour > 23 || minute > 59 || second > 60) return std::nullopt;

  using namespace std::chrono;
  year_month_day ymd{std::chrono::year{year},
                     std::chrono::month{static_cast<unsigned>(month)},
                     std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok()) return std::nullopt;
  std::int64_t days = sys_days{ymd}.time_since_epoch().count();
  std::int64_t secs = days * 86400 + hour * 3600 + minute * 60 + second;
  return Timestamp{secs * kNanosPerSecond + fraction};
}

std::string TimestampFormat::format(Timestamp ts) const {
  using namespace std::chrono;
  std::int64_t secs = ts.nanos / kNanosPerSecond;
  std::int64_t frac = ts.nanos % kNanosPerSecond;
  if (frac < 0) {
    frac += kNanosPerSecond;
    --secs;
  }
  std::int64_t days = secs / 86400;
  std::int64_t rem = secs % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  year_month_day ymd{sys_days{std::chrono::days{days}}};

  std::string out;
  for (const Part& p : parts_) {
    switch (p.kind) {
      case Kind::kLiteral: out += p.literal; break;
      case Kind::kYear: append_padded(out, static_cast<int>(ymd.year()), 4); break;
      case Kind::kMonth: append_padded(out, static_cast<unsigned>(ymd.month()), 2); break;
      case Kind::kDay: append_padded(out, static_cast<unsigned>(ymd.day()), 2); break;
      case Kind::kHour: append_padded(out, rem / 3600, 2); break;
      case Kind::kMinute: append_padded(out, rem / 60 % 60, 2); break;
      case Kind::kSecond: append_padded(out, rem % 60, 2); break;
      case Kind::kFraction: {
        int width = p.digits == 0 ? 3 : p.digits;
        std::int64_t v = frac;
        for (int k = width; k < 9; ++k) v /= 10;
        append_padded(out, v, width);
        break;
      }
    }
  }
  return out;
}

}  // namespace flowtok
