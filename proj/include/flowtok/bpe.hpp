#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "flowtok/record.hpp"
#include "flowtok/schema.hpp"
#include "flowtok/vocab.hpp"

namespace flowtok {

struct TrainOptions {
  std::size_t merges = 1000;  // per group
  // Training stops once the most frequent pair is seen fewer times.
  std::int64_t min_pair_frequency = 2;
  // Weight each distinct value by its number of occurrences instead of 1.
  bool weight_by_frequency = false;
};

struct WeightedValue {
  std::string value;
  std::uint64_t weight = 1;

  bool operator==(const WeightedValue&) const = default;
};

// One row of the training log. Step 0 describes the alphabet-only state;
// step k > 0 is the state after the k-th merge of the group.
struct MergeStep {
  BpeGroup group;
  std::size_t step = 0;
  std::string left;
  std::string right;
  std::int64_t pair_frequency = 0;  // weighted adjacent-pair count of the merged pair
  std::uint64_t token_count = 0;    // weighted symbols over all training values
  std::size_t vocab_size = 0;
};

// Characters that may never appear in a subword value: they delimit the
// fixed tokens.
inline constexpr std::string_view kReservedCharacters = "<>|";

// Distinct field strings of all columns in `group`, first occurrence order,
// with their occurrence counts.
std::vector<WeightedValue> collect_value_counts(std::span<const FlowRecord> records,
                                                const SchemaConfig& schema,
                                                BpeGroup group);
std::vector<std::string> collect_unique_values(std::span<const FlowRecord> records,
                                               const SchemaConfig& schema,
                                               BpeGroup group);

// Learns up to `options.merges` rules for `group` on top of `vocab`.
//
// Each iteration counts every adjacent symbol pair in the current
// segmentation of every value (weighted by WeightedValue::weight), picks
// the highest count with ties broken by the lexicographically smallest
// (left, right), and merges it left to right without overlap.
// Throws GroupAlreadyTrainedError and ReservedCharacterError.
Vocabulary train_bpe_group(Vocabulary vocab, std::span<const WeightedValue> values,
                           BpeGroup group, const TrainOptions& options,
                           std::vector<MergeStep>* log = nullptr);
Vocabulary train_bpe_group(Vocabulary vocab, std::span<const std::string> values,
                           BpeGroup group, const TrainOptions& options,
                           std::vector<MergeStep>* log = nullptr);

// Trains every group in the fixed order on values collected from `records`.
// Groups already trained in `base` are an error; groups in `only` (when
// non-empty) restrict which groups are trained.
Vocabulary train_vocabulary(Vocabulary base, std::span<const FlowRecord> records,
                            const SchemaConfig& schema, const TrainOptions& options,
                            std::vector<MergeStep>* log = nullptr,
                            std::span<const BpeGroup> only = {});

// Greedy segmentation with one group's merge list: the value is split into
// characters, then rule 0 is applied left to right over the whole value,
// then rule 1, and so on.
class BpeSegmenter {
 public:
  BpeSegmenter(const Vocabulary& vocab, BpeGroup group);

  // Appends the ids for `value` to `out`. Throws UnknownCharacterError.
  void encode(std::string_view value, std::vector<TokenId>& out) const;
  std::vector<TokenId> encode(std::string_view value) const {
    std::vector<TokenId> out;
    encode(value, out);
    return out;
  }

  BpeGroup group() const { return group_; }

 private:
  struct Rule {
    std::uint32_t rank;
    TokenId merged;
  };

  TokenId char_id(std::string_view ch, std::string_view value,
                  std::size_t offset) const;

  const Vocabulary* vocab_;
  BpeGroup group_;
  std::vector<TokenId> ascii_;  // byte -> id, -1 when absent
  std::unordered_map<std::uint64_t, std::vector<Rule>> rules_;
};

}  // namespace flowtok
