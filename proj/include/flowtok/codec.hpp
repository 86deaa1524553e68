#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "flowtok/bpe.hpp"
#include "flowtok/record.hpp"
#include "flowtok/schema.hpp"
#include "flowtok/vocab.hpp"

namespace flowtok {

// Linear text form of one record:
//   <|SRCIP|>192.168.220.14<|SRCPORT|>49222 ... <|DTIME|>0.0<|ROW|>
// Categorical fields are written as their fixed token, subword fields
// verbatim. Throws UnknownCategoryError.
std::string serialize_row(const FlowRecord& record, const SchemaConfig& schema);

// Binds a schema to a trained vocabulary. Construction checks that every
// fixed token of the schema is present.
//
// Encoding keeps a per-group memo of recently seen values, so a Codec must
// not be used for encoding from several threads at once. Decoding is const
// and thread-safe.
class Codec {
 public:
  Codec(const SchemaConfig& schema, const Vocabulary& vocab);

  const SchemaConfig& schema() const { return *schema_; }
  const Vocabulary& vocab() const { return *vocab_; }

  // Appends the ids of `value` segmented with `group`'s merges.
  void encode_value(std::string_view value, BpeGroup group,
                    std::vector<TokenId>& out);

  // Appends structural id, value ids, ... and the terminator id.
  // Throws UnknownCategoryError and UnknownCharacterError.
  void encode_row(const FlowRecord& record, std::vector<TokenId>& out);
  std::vector<TokenId> encode_row(const FlowRecord& record) {
    std::vector<TokenId> out;
    encode_row(record, out);
    return out;
  }

  // Character count of serialize_row(record) without building the string.
  std::uint64_t serialized_chars(const FlowRecord& record) const;

  std::vector<FlowRecord> decode(std::span<const TokenId> ids) const;

 private:
  friend class StreamDecoder;

  struct ColumnCodec {
    TokenId structural;
    bool categorical;
    BpeGroup group;
    std::unordered_map<std::string, TokenId> value_to_id;
    std::unordered_map<TokenId, std::string> id_to_value;
    std::uint64_t structural_chars;
  };

  const SchemaConfig* schema_;
  const Vocabulary* vocab_;
  std::vector<ColumnCodec> columns_;
  TokenId terminator_;
  std::uint64_t terminator_chars_;
  std::vector<BpeSegmenter> segmenters_;  // indexed by group
  std::array<std::unordered_map<std::string, std::vector<TokenId>>, kNumGroups> memo_;
};

// Incremental decoder: feed ids in order, completed records are appended to
// the output vector. Errors carry the absolute stream offset of the
// offending id.
class StreamDecoder {
 public:
  explicit StreamDecoder(const Codec& codec) : codec_(&codec) {}

  void feed(std::span<const TokenId> ids, std::vector<FlowRecord>& out);
  // Throws MalformedStreamError if the stream stopped inside a row.
  void finish() const;

  std::uint64_t offset() const { return offset_; }

 private:
  enum class State { kExpectStructural, kInCategorical, kInSubword };

  [[noreturn]] void fail(const std::string& what) const;

  const Codec* codec_;
  State state_ = State::kExpectStructural;
  std::size_t column_ = 0;  // column whose structural token is expected / open
  std::string value_;
  FlowRecord current_;
  std::uint64_t offset_ = 0;
};

// Free-function forms.
std::vector<TokenId> encode_value(std::string_view value, const Vocabulary& vocab,
                                  BpeGroup group);
std::vector<TokenId> encode_row(const FlowRecord& record, const SchemaConfig& schema,
                                const Vocabulary& vocab);
std::vector<FlowRecord> decode(std::span<const TokenId> ids, const Vocabulary& vocab,
                               const SchemaConfig& schema);

}  // namespace flowtok
