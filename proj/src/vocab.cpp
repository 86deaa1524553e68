#include "flowtok/vocab.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "flowtok/error.hpp"
#include "flowtok/utf8.hpp"

namespace flowtok {

namespace {

constexpr std::string_view kMagic = "flowtok-vocab";
constexpr int kVersion = 1;
constexpr std::string_view kTrailer = "checksum sha256 ";

void escape_into(std::string& out, std::string_view s) {
  static constexpr char kHex[] = "0123456789abcdef";
  for (char ch : s) {
    auto c = static_cast<unsigned char>(ch);
    if (c == '\\') {
      out += "\\\\";
    } else if (c > 0x20 && c < 0x7F) {
      out.push_back(ch);
    } else {
      out += "\\x";
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xF]);
    }
  }
}

std::optional<std::string> unescape(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out.push_back(s[i]);
      continue;
    }
    if (i + 1 < s.size() && s[i + 1] == '\\') {
      out.push_back('\\');
      ++i;
      continue;
    }
    if (i + 3 >= s.size() || s[i + 1] != 'x') return std::nullopt;
    unsigned v = 0;
    auto [p, ec] = std::from_chars(s.data() + i + 2, s.data() + i + 4, v, 16);
    if (ec != std::errc{} || p != s.data() + i + 4) return std::nullopt;
    out.push_back(static_cast<char>(v));
    i += 3;
  }
  return out;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t p = line.find(sep, start);
    out.push_back(line.substr(start, p - start));
    if (p == std::string_view::npos) break;
    start = p + 1;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size() && !s.empty();
}

class VocabParser {
 public:
  VocabParser(std::string_view body, std::string_view source)
      : body_(body), source_(source) {}

  Vocabulary parse();

 private:
  std::string_view next_line() {
    if (pos_ >= body_.size()) fail("unexpected end of vocabulary body");
    std::size_t end = body_.find('\n', pos_);
    if (end == std::string_view::npos) end = body_.size();
    std::string_view line = body_.substr(pos_, end - pos_);
    pos_ = end + 1;
    ++line_;
    return line;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(std::string(source_) + ":" + std::to_string(line_) +
                     ": " + what);
  }
  TokenId parse_id(std::string_view s, std::size_t size) const {
    TokenId id = -1;
    if (!parse_number(s, id) || id < 0 || static_cast<std::size_t>(id) >= size) {
      fail("bad token id '" + std::string(s) + "'");
    }
    return id;
  }

  std::string_view body_;
  std::string_view source_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
};

Vocabulary VocabParser::parse() {
  next_line();  // magic, already checked by the caller

  auto head = split(next_line(), ' ');
  std::size_t n = 0, fixed = 0;
  if (head.size() != 4 || head[0] != "tokens" || head[2] != "fixed" ||
      !parse_number(head[1], n) || !parse_number(head[3], fixed) || fixed > n) {
    fail("expected 'tokens <N> fixed <F>'");
  }

  Vocabulary vocab;
  VocabularyEditor ed(vocab);
  std::vector<std::string> strings;
  strings.reserve(n);
  if (fixed == 0) ed.seal_fixed();
  for (std::size_t i = 0; i < n; ++i) {
    auto f = split(next_line(), '\t');
    std::size_t id = 0;
    if (f.size() != 2 || !parse_number(f[0], id) || id != i) {
      fail("expected '<id>\\t<token>' with id " + std::to_string(i));
    }
    auto s = unescape(f[1]);
    if (!s || s->empty()) fail("bad token text");
    if (ed.intern(*s) != static_cast<TokenId>(i)) {
      fail("token '" + *s + "' appears more than once");
    }
    if (i + 1 == fixed) ed.seal_fixed();
    strings.push_back(std::move(*s));
  }

  for (BpeGroup g : kAllGroups) {
    auto gh = split(next_line(), ' ');
    std::size_t n_alpha = 0, n_merges = 0;
    if (gh.size() != 5 || gh[0] != "group" || gh[1] != group_name(g) ||
        (gh[2] != "0" && gh[2] != "1") || !parse_number(gh[3], n_alpha) ||
        !parse_number(gh[4], n_merges)) {
      fail("expected 'group " + std::string(group_name(g)) +
           " <trained> <alphabet> <merges>'");
    }
    if (gh[2] == "1") ed.mark_trained(g);

    auto alpha = split(next_line(), '\t');
    if (alpha[0] != "alphabet" || alpha.size() != n_alpha + 1) {
      fail("alphabet line does not list " + std::to_string(n_alpha) + " ids");
    }
    for (std::size_t k = 1; k < alpha.size(); ++k) {
      TokenId id = parse_id(alpha[k], n);
      if (vocab.is_fixed(id) || utf8::char_count(strings[id]) != 1) {
        fail("alphabet entry " + std::to_string(id) + " is not a character");
      }
      ed.add_alphabet(g, strings[id]);
    }

    for (std::size_t r = 0; r < n_merges; ++r) {
      auto m = split(next_line(), '\t');
      std::uint32_t rank = 0;
      if (m.size() != 5 || m[0] != "merge" || !parse_number(m[1], rank) ||
          rank != r) {
        fail("expected 'merge\\t" + std::to_string(r) +
             "\\t<left>\\t<right>\\t<merged>'");
      }
      TokenId l = parse_id(m[2], n), rt = parse_id(m[3], n), mg = parse_id(m[4], n);
      if (vocab.is_fixed(l) || vocab.is_fixed(rt) || vocab.is_fixed(mg) ||
          strings[mg] != strings[l] + strings[rt]) {
        fail("merge " + std::to_string(r) + " is inconsistent");
      }
      ed.add_merge(g, MergeRule{strings[l], strings[rt], strings[mg], rank});
    }
  }
  if (pos_ < body_.size()) fail("trailing data after last group");
  return vocab;
}

}  // namespace

std::optional<TokenId> Vocabulary::id_of(std::string_view token) const {
  auto it = ids_.find(token);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocabulary::string_of(TokenId id) const {
  if (!contains(id)) {
    throw std::out_of_range("token id " + std::to_string(id) +
                            " outside vocabulary of size " +
                            std::to_string(strings_.size()));
  }
  return strings_[static_cast<std::size_t>(id)];
}

std::string Vocabulary::serialize() const {
  std::string out;
  out.reserve(strings_.size() * 16 + 256);
  out += kMagic;
  out += ' ';
  out += std::to_string(kVersion);
  out += '\n';
  out += "tokens " + std::to_string(strings_.size()) + " fixed " +
         std::to_string(fixed_count_) + "\n";
  for (std::size_t i = 0; i < strings_.size(); ++i) {
    out += std::to_string(i);
    out += '\t';
    escape_into(out, strings_[i]);
    out += '\n';
  }
  for (BpeGroup g : kAllGroups) {
    const auto& alpha = alphabet(g);
    const auto& rules = merges(g);
    out += "group ";
    out += group_name(g);
    out += is_trained(g) ? " 1 " : " 0 ";
    out += std::to_string(alpha.size()) + " " + std::to_string(rules.size()) + "\n";
    out += "alphabet";
    for (const std::string& s : alpha) {
      out += '\t';
      out += std::to_string(*id_of(s));
    }
    out += '\n';
    for (const MergeRule& r : rules) {
      out += "merge\t" + std::to_string(r.rank) + '\t' +
             std::to_string(*id_of(r.left)) + '\t' +
             std::to_string(*id_of(r.right)) + '\t' +
             std::to_string(*id_of(r.merged)) + '\n';
    }
  }
  return out;
}

Sha256Digest Vocabulary::checksum() const { return sha256(serialize()); }

bool Vocabulary::operator==(const Vocabulary& other) const {
  return strings_ == other.strings_ && fixed_count_ == other.fixed_count_ &&
         alphabets_ == other.alphabets_ && merges_ == other.merges_ &&
         trained_ == other.trained_;
}

TokenId VocabularyEditor::intern(std::string_view token) {
  if (auto id = v_.id_of(token)) return *id;
  auto id = static_cast<TokenId>(v_.strings_.size());
  v_.strings_.emplace_back(token);
  v_.ids_.emplace(v_.strings_.back(), id);
  return id;
}

Vocabulary init_fixed_vocab(const SchemaConfig& schema) {
  validate_schema(schema);
  Vocabulary vocab;
  VocabularyEditor ed(vocab);
  for (const ColumnSpec& c : schema.columns) ed.intern(c.structural_token);
  ed.intern(schema.row_terminator);
  for (const ColumnSpec& c : schema.columns) {
    if (!c.is_categorical()) continue;
    for (const CategoryValue& cv : c.categorical().values) ed.intern(cv.token);
  }
  ed.seal_fixed();
  return vocab;
}

void save_vocab(const Vocabulary& vocab, const std::filesystem::path& path) {
  std::string body = vocab.serialize();
  std::string trailer = std::string(kTrailer) + to_hex(sha256(body)) + "\n";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create '" + path.string() + "'");
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  out.write(trailer.data(), static_cast<std::streamsize>(trailer.size()));
  out.flush();
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

Vocabulary parse_vocab(std::string_view bytes, std::string_view source_name) {
  std::string src(source_name);
  std::string_view first = bytes.substr(0, bytes.find('\n'));
  auto head = split(first, ' ');
  if (head.size() != 2 || head[0] != kMagic) {
    throw FormatVersionError(src + ": not a vocabulary file");
  }
  if (head[1] != std::to_string(kVersion)) {
    throw FormatVersionError(src + ": unsupported vocabulary version '" +
                             std::string(head[1]) + "'");
  }

  // The trailer is the last line: "checksum sha256 <hex>\n".
  if (bytes.empty() || bytes.back() != '\n') {
    throw ChecksumError(src + ": missing checksum trailer (truncated file?)");
  }
  std::size_t start = bytes.rfind('\n', bytes.size() - 2);
  start = start == std::string_view::npos ? 0 : start + 1;
  std::string_view trailer = bytes.substr(start, bytes.size() - 1 - start);
  if (!trailer.starts_with(kTrailer)) {
    throw ChecksumError(src + ": missing checksum trailer (truncated file?)");
  }
  auto expected = digest_from_hex(trailer.substr(kTrailer.size()));
  std::string_view body = bytes.substr(0, start);
  if (!expected || *expected != sha256(body)) {
    throw ChecksumError(src + ": checksum mismatch");
  }
  return VocabParser(body, source_name).parse();
}

Vocabulary load_vocab(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open vocabulary '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path.string() + "'");
  return parse_vocab(buf.str(), path.string());
}

}  // namespace flowtok
