#include "flowtok/codec.hpp"

#include "flowtok/error.hpp"
#include "flowtok/utf8.hpp"

namespace flowtok {

namespace {

constexpr std::size_t kMemoLimit = 1 << 18;

const CategoryValue* find_category(const ColumnSpec& col, std::string_view value) {
  for (const CategoryValue& cv : col.categorical().values) {
    if (cv.value == value) return &cv;
  }
  return nullptr;
}

[[noreturn]] void unknown_category(const ColumnSpec& col, std::string_view value) {
  throw UnknownCategoryError("column '" + col.name + "': value '" +
                             std::string(value) +
                             "' is not in the declared category set");
}

void check_width(const FlowRecord& record, const SchemaConfig& schema) {
  if (record.values.size() != schema.columns.size()) {
    throw ValidationError("record has " + std::to_string(record.values.size()) +
                          " fields, schema has " +
                          std::to_string(schema.columns.size()));
  }
}

}  // namespace

std::string serialize_row(const FlowRecord& record, const SchemaConfig& schema) {
  check_width(record, schema);
  std::string out;
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    const ColumnSpec& col = schema.columns[c];
    out += col.structural_token;
    if (col.is_categorical()) {
      const CategoryValue* cv = find_category(col, record.values[c]);
      if (cv == nullptr) unknown_category(col, record.values[c]);
      out += cv->token;
    } else {
      out += record.values[c];
    }
  }
  out += schema.row_terminator;
  return out;
}

Codec::Codec(const SchemaConfig& schema, const Vocabulary& vocab)
    : schema_(&schema), vocab_(&vocab) {
  auto fixed_id = [&](const std::string& token) {
    auto id = vocab.id_of(token);
    if (!id || !vocab.is_fixed(*id)) {
      throw ValidationError("vocabulary has no fixed token '" + token +
                            "'; it was not built for this schema");
    }
    return *id;
  };

  for (const ColumnSpec& col : schema.columns) {
    ColumnCodec cc;
    cc.structural = fixed_id(col.structural_token);
    cc.structural_chars = utf8::char_count(col.structural_token);
    cc.categorical = col.is_categorical();
    cc.group = cc.categorical ? BpeGroup::kNumeric : col.group();
    if (cc.categorical) {
      for (const CategoryValue& cv : col.categorical().values) {
        TokenId id = fixed_id(cv.token);
        cc.value_to_id.emplace(cv.value, id);
        cc.id_to_value.emplace(id, cv.value);
      }
    }
    columns_.push_back(std::move(cc));
  }
  terminator_ = fixed_id(schema.row_terminator);
  terminator_chars_ = utf8::char_count(schema.row_terminator);

  segmenters_.reserve(kNumGroups);
  for (BpeGroup g : kAllGroups) segmenters_.emplace_back(vocab, g);
}

void Codec::encode_value(std::string_view value, BpeGroup group,
                         std::vector<TokenId>& out) {
  auto& memo = memo_[group_index(group)];
  auto it = memo.find(std::string(value));
  if (it != memo.end()) {
    out.insert(out.end(), it->second.begin(), it->second.end());
    return;
  }
  std::vector<TokenId> ids = segmenters_[group_index(group)].encode(value);
  out.insert(out.end(), ids.begin(), ids.end());
  if (memo.size() >= kMemoLimit) memo.clear();
  memo.emplace(std::string(value), std::move(ids));
}

void Codec::encode_row(const FlowRecord& record, std::vector<TokenId>& out) {
  check_width(record, *schema_);
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    const ColumnCodec& cc = columns_[c];
    out.push_back(cc.structural);
    const std::string& value = record.values[c];
    if (cc.categorical) {
      auto it = cc.value_to_id.find(value);
      if (it == cc.value_to_id.end()) unknown_category(schema_->columns[c], value);
      out.push_back(it->second);
    } else {
      encode_value(value, cc.group, out);
    }
  }
  out.push_back(terminator_);
}

std::uint64_t Codec::serialized_chars(const FlowRecord& record) const {
  check_width(record, *schema_);
  std::uint64_t n = terminator_chars_;
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    const ColumnCodec& cc = columns_[c];
    n += cc.structural_chars;
    const std::string& value = record.values[c];
    if (cc.categorical) {
      auto it = cc.value_to_id.find(value);
      if (it == cc.value_to_id.end()) unknown_category(schema_->columns[c], value);
      n += utf8::char_count(vocab_->string_of(it->second));
    } else {
      n += utf8::char_count(value);
    }
  }
  return n;
}

std::vector<FlowRecord> Codec::decode(std::span<const TokenId> ids) const {
  std::vector<FlowRecord> out;
  StreamDecoder dec(*this);
  dec.feed(ids, out);
  dec.finish();
  return out;
}

void StreamDecoder::fail(const std::string& what) const {
  throw MalformedStreamError("token stream offset " + std::to_string(offset_) +
                             ": " + what);
}

void StreamDecoder::feed(std::span<const TokenId> ids, std::vector<FlowRecord>& out) {
  const Vocabulary& vocab = *codec_->vocab_;
  const auto& columns = codec_->columns_;

  for (TokenId id : ids) {
    if (!vocab.contains(id)) fail("unknown token id " + std::to_string(id));

    if (state_ == State::kInSubword) {
      if (!vocab.is_fixed(id)) {
        value_ += vocab.string_of(id);
        ++offset_;
        continue;
      }
      current_.values.push_back(std::move(value_));
      value_.clear();
      ++column_;
      state_ = State::kExpectStructural;
      // `id` is re-examined below as the next structural token.
    }

    if (state_ == State::kInCategorical) {
      const auto& map = columns[column_].id_to_value;
      auto it = map.find(id);
      if (it == map.end()) {
        fail("expected a category token of column '" +
             codec_->schema_->columns[column_].name + "', found '" +
             vocab.string_of(id) + "'");
      }
      current_.values.push_back(it->second);
      ++column_;
      state_ = State::kExpectStructural;
      ++offset_;
      continue;
    }

    // kExpectStructural
    const bool row_end = column_ == columns.size();
    const TokenId expected = row_end ? codec_->terminator_ : columns[column_].structural;
    if (id != expected) {
      fail("expected '" + vocab.string_of(expected) + "', found '" +
           vocab.string_of(id) + "'");
    }
    if (row_end) {
      out.push_back(std::move(current_));
      current_.values.clear();
      column_ = 0;
    } else {
      state_ = columns[column_].categorical ? State::kInCategorical : State::kInSubword;
    }
    ++offset_;
  }
}

void StreamDecoder::finish() const {
  if (state_ != State::kExpectStructural || column_ != 0) {
    fail("stream ends inside a row");
  }
}

std::vector<TokenId> encode_value(std::string_view value, const Vocabulary& vocab,
                                  BpeGroup group) {
  return BpeSegmenter(vocab, group).encode(value);
}

std::vector<TokenId> encode_row(const FlowRecord& record, const SchemaConfig& schema,
                                const Vocabulary& vocab) {
  return Codec(schema, vocab).encode_row(record);
}

std::vector<FlowRecord> decode(std::span<const TokenId> ids, const Vocabulary& vocab,
                               const SchemaConfig& schema) {
  return Codec(schema, vocab).decode(ids);
}

}  // namespace flowtok
