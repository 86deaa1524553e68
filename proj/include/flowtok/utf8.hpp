#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace flowtok::utf8 {

// Byte length of the sequence starting with `lead`. Malformed lead bytes
// count as one byte so every input splits losslessly.
constexpr std::size_t sequence_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead & 0xE0) == 0xC0) return 2;
  if ((lead & 0xF0) == 0xE0) return 3;
  if ((lead & 0xF8) == 0xF0) return 4;
  return 1;
}

// Calls fn(offset, character) for each character of `s`.
template <typename Fn>
void for_each_char(std::string_view s, Fn&& fn) {
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t n = sequence_length(static_cast<unsigned char>(s[i]));
    if (i + n > s.size()) n = s.size() - i;
    fn(i, s.substr(i, n));
    i += n;
  }
}

// Number of characters (Unicode scalar values for valid UTF-8).
inline std::uint64_t char_count(std::string_view s) {
  std::uint64_t n = 0;
  for_each_char(s, [&n](std::size_t, std::string_view) { ++n; });
  return n;
}

}  // namespace flowtok::utf8
