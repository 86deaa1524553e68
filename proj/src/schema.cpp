#include "flowtok/schema.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "flowtok/error.hpp"

namespace flowtok {

namespace {

constexpr std::string_view kMagic = "flowtok-schema";
constexpr int kVersion = 1;

struct Word {
  std::string text;
  std::size_t eq = std::string::npos;  // first unquoted '=' in text
  std::size_t column = 0;              // 1-based
  bool quoted = false;
};

struct Line {
  std::size_t number = 0;
  bool indented = false;
  std::vector<Word> words;
};

class SchemaParser {
 public:
  SchemaParser(std::string_view text, std::string_view source)
      : text_(text), source_(source) {}

  SchemaConfig parse();

 private:
  [[noreturn]] void fail(const Line& line, const Word* word,
                         const std::string& what) const {
    std::ostringstream os;
    os << source_ << ':' << line.number;
    if (word != nullptr) os << ':' << word->column;
    os << ": " << what;
    throw ParseError(os.str());
  }
  [[noreturn]] void invalid(const Line& line, const std::string& what) const {
    std::ostringstream os;
    os << source_ << ':' << line.number << ": " << what;
    throw ValidationError(os.str());
  }

  Line lex(std::string_view raw, std::size_t number) const;
  ColumnSpec parse_column(const Line& line, bool derived) const;

  std::string_view text_;
  std::string_view source_;
};

Line SchemaParser::lex(std::string_view raw, std::size_t number) const {
  Line line;
  line.number = number;
  line.indented = !raw.empty() && (raw[0] == ' ' || raw[0] == '\t');

  std::size_t i = 0;
  while (i < raw.size()) {
    char c = raw[i];
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    if (c == '#') break;

    Word w;
    w.column = i + 1;
    while (i < raw.size()) {
      c = raw[i];
      if (c == ' ' || c == '\t' || c == '\r') break;
      if (c == '"') {
        w.quoted = true;
        ++i;
        bool closed = false;
        while (i < raw.size()) {
          c = raw[i++];
          if (c == '"') {
            closed = true;
            break;
          }
          if (c == '\\') {
            if (i >= raw.size()) break;
            char e = raw[i++];
            switch (e) {
              case 'n': w.text.push_back('\n'); break;
              case 't': w.text.push_back('\t'); break;
              case '\\': w.text.push_back('\\'); break;
              case '"': w.text.push_back('"'); break;
              default: {
                Line tmp = line;
                fail(tmp, &w, std::string("unknown escape '\\") + e + "'");
              }
            }
            continue;
          }
          w.text.push_back(c);
        }
        if (!closed) fail(line, &w, "unterminated quoted string");
        continue;
      }
      if (c == '=' && w.eq == std::string::npos) w.eq = w.text.size();
      w.text.push_back(c);
      ++i;
    }
    line.words.push_back(std::move(w));
  }
  return line;
}

ColumnSpec SchemaParser::parse_column(const Line& line, bool derived) const {
  const auto& w = line.words;
  const std::string& kw = w[0].text;
  if (w.size() < 4) {
    fail(line, &w[0], kw + " needs: <name> <structural-token> <class>");
  }
  ColumnSpec col;
  col.name = w[1].text;
  col.structural_token = w[2].text;
  col.derived = derived;

  const std::string& cls = w[3].text;
  if (cls == "categorical") {
    if (derived) invalid(line, "the delta column cannot be categorical");
    col.token_class = FixedCategorical{};
  } else if (auto g = parse_group(cls)) {
    col.token_class = Subword{*g};
  } else {
    invalid(line, "unknown token class or group '" + cls + "'");
  }

  for (std::size_t k = 4; k < w.size(); ++k) {
    if (w[k].text == "integer" && !w[k].quoted) {
      if (derived || col.is_categorical()) {
        invalid(line, "'integer' only applies to subword CSV columns");
      }
      col.integer = true;
    } else {
      fail(line, &w[k], "unexpected attribute '" + w[k].text + "'");
    }
  }
  return col;
}

SchemaConfig SchemaParser::parse() {
  SchemaConfig schema;
  schema.row_terminator.clear();
  bool saw_magic = false;
  bool saw_terminator = false;
  bool saw_timestamp = false;
  ColumnSpec* open_categorical = nullptr;
  std::vector<std::size_t> column_lines;

  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos <= text_.size()) {
    std::size_t end = text_.find('\n', pos);
    if (end == std::string_view::npos) end = text_.size();
    std::string_view raw = text_.substr(pos, end - pos);
    pos = end + 1;
    ++number;

    Line line = lex(raw, number);
    if (line.words.empty()) continue;

    if (line.indented) {
      if (open_categorical == nullptr) {
        fail(line, &line.words[0],
             "indented value list must follow a categorical column");
      }
      auto& values = std::get<FixedCategorical>(open_categorical->token_class)
                         .values;
      for (const Word& w : line.words) {
        CategoryValue cv;
        if (w.eq == std::string::npos) {
          cv.value = w.text;
          cv.token = default_category_token(cv.value);
        } else {
          cv.value = w.text.substr(0, w.eq);
          cv.token = w.text.substr(w.eq + 1);
        }
        values.push_back(std::move(cv));
      }
      continue;
    }

    open_categorical = nullptr;
    const std::string& kw = line.words[0].text;

    if (!saw_magic) {
      if (kw != kMagic || line.words.size() != 2) {
        fail(line, &line.words[0],
             "expected '" + std::string(kMagic) + " " +
                 std::to_string(kVersion) + "' header");
      }
      if (line.words[1].text != std::to_string(kVersion)) {
        fail(line, &line.words[1],
             "unsupported schema version '" + line.words[1].text + "'");
      }
      saw_magic = true;
      continue;
    }

    if (kw == "terminator") {
      if (line.words.size() != 2) fail(line, &line.words[0], "terminator needs one token");
      if (saw_terminator) fail(line, &line.words[0], "duplicate terminator");
      schema.row_terminator = line.words[1].text;
      saw_terminator = true;
    } else if (kw == "timestamp") {
      if (line.words.size() < 2 || line.words.size() > 3) {
        fail(line, &line.words[0], "timestamp needs: <column> [format]");
      }
      if (saw_timestamp) fail(line, &line.words[0], "duplicate timestamp");
      schema.timestamp_column = line.words[1].text;
      if (line.words.size() == 3) schema.timestamp_format = line.words[2].text;
      saw_timestamp = true;
    } else if (kw == "column" || kw == "delta") {
      schema.columns.push_back(parse_column(line, kw == "delta"));
      column_lines.push_back(line.number);
      if (schema.columns.back().is_categorical()) {
        open_categorical = &schema.columns.back();
      }
    } else {
      fail(line, &line.words[0], "unknown directive '" + kw + "'");
    }
  }

  if (!saw_magic) {
    throw ParseError(std::string(source_) + ": empty schema file");
  }
  if (!saw_terminator) schema.row_terminator = std::string(kDefaultRowTerminator);
  if (!saw_timestamp) {
    throw ValidationError(std::string(source_) +
                          ": missing 'timestamp' directive");
  }
  validate_schema(schema);
  return schema;
}

bool is_structural(std::string_view tok) {
  return tok.size() >= 5 && tok.starts_with("<|") && tok.ends_with("|>");
}

}  // namespace

std::string_view group_name(BpeGroup g) {
  switch (g) {
    case BpeGroup::kIpAddress: return "ip";
    case BpeGroup::kPort: return "port";
    case BpeGroup::kNumeric: return "numeric";
  }
  return "?";
}

std::optional<BpeGroup> parse_group(std::string_view name) {
  for (BpeGroup g : kAllGroups) {
    if (group_name(g) == name) return g;
  }
  return std::nullopt;
}

std::string default_category_token(std::string_view value) {
  std::string tok;
  tok.reserve(value.size() + 2);
  tok.push_back('<');
  tok.append(value);
  tok.push_back('>');
  return tok;
}

std::size_t SchemaConfig::delta_index() const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].derived) return i;
  }
  throw ValidationError("schema has no delta column");
}

std::optional<std::size_t> SchemaConfig::find_column(
    std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == name) return i;
  }
  return std::nullopt;
}

void validate_schema(const SchemaConfig& schema) {
  if (schema.columns.empty()) {
    throw ValidationError("schema declares no columns");
  }
  if (!is_structural(schema.row_terminator)) {
    throw ValidationError("row terminator '" + schema.row_terminator +
                          "' must look like <|NAME|>");
  }
  if (schema.timestamp_column.empty()) {
    throw ValidationError("timestamp column name is empty");
  }

  std::set<std::string, std::less<>> names;
  std::set<std::string, std::less<>> structural{schema.row_terminator};
  std::size_t derived = 0;

  for (const ColumnSpec& col : schema.columns) {
    if (col.name.empty()) throw ValidationError("column with empty name");
    if (!names.insert(col.name).second) {
      throw ValidationError("duplicate column name '" + col.name + "'");
    }
    if (col.name == schema.timestamp_column) {
      throw ValidationError("timestamp column '" + col.name +
                            "' cannot also be a serialized column");
    }
    if (!is_structural(col.structural_token)) {
      throw ValidationError("structural token '" + col.structural_token +
                            "' of column '" + col.name +
                            "' must look like <|NAME|>");
    }
    if (!structural.insert(col.structural_token).second) {
      throw ValidationError("structural token '" + col.structural_token +
                            "' is used more than once");
    }
    if (col.derived) {
      ++derived;
      if (col.is_categorical()) {
        throw ValidationError("delta column '" + col.name +
                              "' must be a subword column");
      }
    }
    if (col.integer && (col.derived || col.is_categorical())) {
      throw ValidationError("column '" + col.name +
                            "' cannot be integer-validated");
    }
    if (!col.is_categorical()) continue;

    const auto& values = col.categorical().values;
    if (values.empty()) {
      throw ValidationError("categorical column '" + col.name +
                            "' has an empty value set");
    }
    std::set<std::string_view> seen_values;
    std::set<std::string_view> seen_tokens;
    for (const CategoryValue& cv : values) {
      if (!seen_values.insert(cv.value).second) {
        throw ValidationError("duplicate value '" + cv.value +
                              "' in column '" + col.name + "'");
      }
      if (!seen_tokens.insert(cv.token).second) {
        throw ValidationError("duplicate token '" + cv.token +
                              "' in column '" + col.name + "'");
      }
      // Category tokens are atoms: "<" body ">" with no markup inside, so
      // they can never overlap a structural token or each other.
      const std::string& t = cv.token;
      bool ok = t.size() >= 2 && t.front() == '<' && t.back() == '>';
      if (ok) {
        std::string_view body(t.data() + 1, t.size() - 2);
        ok = body.find_first_of("<>|") == std::string_view::npos;
      }
      if (!ok) {
        throw ValidationError("category token '" + t + "' of column '" +
                              col.name + "' must be <VALUE> without <, >, |");
      }
    }
  }
  if (derived != 1) {
    throw ValidationError("schema must declare exactly one delta column");
  }
}

SchemaConfig parse_schema(std::string_view text, std::string_view source_name) {
  return SchemaParser(text, source_name).parse();
}

SchemaConfig load_schema(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open schema file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path.string() + "'");
  return parse_schema(buf.str(), path.string());
}

namespace {

std::string quote(std::string_view s) {
  bool bare = !s.empty() &&
              s.find_first_of(" \t\"#=\\\n") == std::string_view::npos;
  if (bare) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  out.push_back('"');
  return out;
}

}  // namespace

std::string format_schema(const SchemaConfig& schema) {
  std::ostringstream os;
  os << kMagic << ' ' << kVersion << '\n';
  os << "terminator " << quote(schema.row_terminator) << '\n';
  os << "timestamp " << quote(schema.timestamp_column) << ' '
     << quote(schema.timestamp_format) << '\n';
  for (const ColumnSpec& col : schema.columns) {
    os << (col.derived ? "delta " : "column ") << quote(col.name) << ' '
       << quote(col.structural_token) << ' ';
    if (col.is_categorical()) {
      os << "categorical\n";
      for (const CategoryValue& cv : col.categorical().values) {
        os << "    " << quote(cv.value);
        if (cv.token != default_category_token(cv.value)) {
          os << '=' << quote(cv.token);
        }
        os << '\n';
      }
    } else {
      os << group_name(col.group());
      if (col.integer) os << " integer";
      os << '\n';
    }
  }
  return os.str();
}

}  // namespace flowtok
