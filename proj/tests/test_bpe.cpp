#include <gtest/gtest.h>

#include <random>

#include "flowtok/bpe.hpp"
#include "flowtok/error.hpp"
#include "flowtok/vocab.hpp"
#include "support/bpe_reference.hpp"
#include "support/test_util.hpp"

namespace flowtok {
namespace {

const char* kSchema = R"(flowtok-schema 1
timestamp t
column a <|A|> ip
column b <|B|> ip
column p <|P|> port
column q <|Q|> categorical
    x y
delta d <|D|> numeric
)";

std::vector<std::pair<std::string, std::string>> merge_pairs(const Vocabulary& v, BpeGroup g) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const MergeRule& m : v.merges(g)) out.emplace_back(m.left, m.right);
  return out;
}

std::vector<std::pair<std::string, std::string>> merge_pairs(const reference::Trained& t) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& m : t.merges) out.emplace_back(m.left, m.right);
  return out;
}

std::vector<std::string> strings(const Vocabulary& v, const std::vector<TokenId>& ids) {
  std::vector<std::string> out;
  for (TokenId id : ids) out.push_back(v.string_of(id));
  return out;
}

Vocabulary empty_vocab() { return init_fixed_vocab(parse_schema(kSchema)); }

TEST(Bpe, WorkedExampleTwoMerges) {
  std::vector<std::string> values = {"aaab", "aaac"};
  TrainOptions opt;
  opt.merges = 2;
  Vocabulary v = train_bpe_group(empty_vocab(), values, BpeGroup::kIpAddress, opt);
  using P = std::pair<std::string, std::string>;
  EXPECT_EQ(merge_pairs(v, BpeGroup::kIpAddress), (std::vector<P>{{"a", "a"}, {"aa", "a"}}));
  EXPECT_EQ(merge_pairs(v, BpeGroup::kIpAddress), merge_pairs(reference::train(values, 2)));
  EXPECT_EQ(v.merges(BpeGroup::kIpAddress)[1], (MergeRule{"aa", "a", "aaa", 1}));

  BpeSegmenter seg(v, BpeGroup::kIpAddress);
  EXPECT_EQ(strings(v, seg.encode("aaab")), (std::vector<std::string>{"aaa", "b"}));
  EXPECT_EQ(reference::segment("aaab", reference::train(values, 2).merges),
            (std::vector<std::string>{"aaa", "b"}));
}

TEST(Bpe, EarlyStopBelowMinimumFrequency) {
  std::vector<std::string> values = {"ab"};
  TrainOptions opt;
  opt.merges = 5;
  // The only pair is seen once, below the default minimum of 2.
  Vocabulary v = train_bpe_group(empty_vocab(), values, BpeGroup::kPort, opt);
  EXPECT_TRUE(v.merges(BpeGroup::kPort).empty());
  EXPECT_TRUE(v.is_trained(BpeGroup::kPort));

  opt.min_pair_frequency = 1;
  Vocabulary v1 = train_bpe_group(empty_vocab(), values, BpeGroup::kPort, opt);
  ASSERT_EQ(v1.merges(BpeGroup::kPort).size(), 1u);
  EXPECT_EQ(v1.merges(BpeGroup::kPort)[0], (MergeRule{"a", "b", "ab", 0}));
  EXPECT_EQ(merge_pairs(reference::train(values, 5, 1)), merge_pairs(v1, BpeGroup::kPort));
}

TEST(Bpe, ZeroMergesGivesAlphabetOnly) {
  std::vector<std::string> values = {"10.0.0.1", "10.0.0.2"};
  TrainOptions opt;
  opt.merges = 0;
  std::vector<MergeStep> log;
  Vocabulary base = empty_vocab();
  Vocabulary v = train_bpe_group(base, values, BpeGroup::kIpAddress, opt, &log);
  EXPECT_TRUE(v.merges(BpeGroup::kIpAddress).empty());
  EXPECT_EQ(v.alphabet(BpeGroup::kIpAddress),
            (std::vector<std::string>{"1", "0", ".", "2"}));
  EXPECT_EQ(v.size(), base.size() + 4);
  ASSERT_EQ(log.size(), 1u);
  EXPECT_EQ(log[0].step, 0u);
  EXPECT_EQ(log[0].token_count, 16u);
  EXPECT_EQ(log[0].vocab_size, v.size());
}

TEST(Bpe, AlphabetIdsFollowFixedTokensInFirstSeenOrder) {
  Vocabulary base = empty_vocab();
  std::vector<std::string> values = {"ba", "ab", "c"};
  TrainOptions opt;
  opt.merges = 0;
  Vocabulary v = train_bpe_group(base, values, BpeGroup::kIpAddress, opt);
  auto n = static_cast<TokenId>(base.size());
  EXPECT_EQ(v.id_of("b"), n);
  EXPECT_EQ(v.id_of("a"), n + 1);
  EXPECT_EQ(v.id_of("c"), n + 2);
}

TEST(Bpe, RetrainingGroupFails) {
  std::vector<std::string> values = {"1"};
  Vocabulary v = train_bpe_group(empty_vocab(), values, BpeGroup::kNumeric, {});
  EXPECT_THROW(train_bpe_group(v, values, BpeGroup::kNumeric, {}), GroupAlreadyTrainedError);
}

TEST(Bpe, ReservedCharactersRejected) {
  for (std::string bad : {"a<b", "x|", ">"}) {
    std::vector<std::string> values = {bad};
    EXPECT_THROW(train_bpe_group(empty_vocab(), values, BpeGroup::kIpAddress, {}),
                 ReservedCharacterError)
        << bad;
  }
}

TEST(Bpe, CrossGroupSymbolsReuseIds) {
  TrainOptions opt;
  opt.merges = 10;
  std::vector<std::string> ips = {"123", "123", "1234"};
  std::vector<std::string> ports = {"123", "1230", "4123"};
  Vocabulary v = train_bpe_group(empty_vocab(), ips, BpeGroup::kIpAddress, opt);
  std::size_t before = v.size();
  v = train_bpe_group(v, ports, BpeGroup::kPort, opt);
  EXPECT_EQ(merge_pairs(v, BpeGroup::kPort), merge_pairs(reference::train(ports, 10)));
  // "0" is the only new character; "12" and "123" already exist.
  EXPECT_EQ(v.alphabet(BpeGroup::kPort), (std::vector<std::string>{"1", "2", "3", "0", "4"}));
  std::size_t fresh = 1;
  for (const MergeRule& m : v.merges(BpeGroup::kPort)) {
    bool existed = false;
    for (const MergeRule& o : v.merges(BpeGroup::kIpAddress)) existed = existed || o.merged == m.merged;
    if (!existed) ++fresh;
  }
  EXPECT_EQ(v.size(), before + fresh);
  for (TokenId id = 0; id < static_cast<TokenId>(v.size()); ++id) {
    EXPECT_EQ(v.id_of(v.string_of(id)), id);
  }
}

TEST(Bpe, WeightedTraining) {
  std::vector<WeightedValue> values = {{"ab", 5}, {"cd", 3}, {"cd", 1}};
  TrainOptions opt;
  opt.merges = 5;
  opt.weight_by_frequency = true;
  Vocabulary v = train_bpe_group(empty_vocab(), values, BpeGroup::kNumeric, opt);
  std::vector<std::pair<std::string, std::uint64_t>> ref_values = {{"ab", 5}, {"cd", 3}, {"cd", 1}};
  auto expected = reference::train(ref_values, 5);
  EXPECT_EQ(merge_pairs(v, BpeGroup::kNumeric), merge_pairs(expected));
  ASSERT_EQ(v.merges(BpeGroup::kNumeric).size(), 2u);
  EXPECT_EQ(v.merges(BpeGroup::kNumeric)[0].merged, "ab");
}

TEST(Bpe, TrainVocabularyUsesGroupOrderAndUniqueValues) {
  SchemaConfig s = parse_schema(kSchema);
  std::vector<FlowRecord> recs = {
      {{"A", "B", "1", "x", "nan"}},
      {{"B", "C", "1", "y", "0.0"}},
      {{"A", "C", "2", "x", "0.0"}},
  };
  EXPECT_EQ(collect_unique_values(recs, s, BpeGroup::kIpAddress),
            (std::vector<std::string>{"A", "B", "C"}));
  EXPECT_EQ(collect_unique_values(recs, s, BpeGroup::kNumeric),
            (std::vector<std::string>{"nan", "0.0"}));
  EXPECT_TRUE(collect_unique_values({}, s, BpeGroup::kPort).empty());
  auto counts = collect_value_counts(recs, s, BpeGroup::kIpAddress);
  EXPECT_EQ(counts, (std::vector<WeightedValue>{{"A", 2}, {"B", 2}, {"C", 2}}));

  std::vector<MergeStep> log;
  Vocabulary v = train_vocabulary(init_fixed_vocab(s), recs, s, {}, &log);
  for (BpeGroup g : kAllGroups) EXPECT_TRUE(v.is_trained(g));
  std::vector<BpeGroup> order;
  for (const MergeStep& m : log) {
    if (order.empty() || order.back() != m.group) order.push_back(m.group);
  }
  EXPECT_EQ(order, (std::vector<BpeGroup>(kAllGroups.begin(), kAllGroups.end())));

  std::vector<BpeGroup> only = {BpeGroup::kPort};
  Vocabulary partial = train_vocabulary(init_fixed_vocab(s), recs, s, {}, nullptr, only);
  EXPECT_FALSE(partial.is_trained(BpeGroup::kIpAddress));
  EXPECT_TRUE(partial.is_trained(BpeGroup::kPort));
  Vocabulary rest = train_vocabulary(partial, recs, s, {}, nullptr,
                                     std::vector<BpeGroup>{BpeGroup::kIpAddress, BpeGroup::kNumeric});
  EXPECT_THROW(train_vocabulary(rest, recs, s, {}), GroupAlreadyTrainedError);
}

TEST(Bpe, NumericGroupOverExampleRow) {
  SchemaConfig s = load_schema(testing::cidds_schema_path());
  FlowRecord r{{"192.168.220.14", "49222", "192.168.100.5", "443", "TCP  ", "0.000", "0", "1",
                ".AP...", "1", "normal", "---", "0.0"}};
  EXPECT_EQ(collect_unique_values(std::vector<FlowRecord>{r}, s, BpeGroup::kNumeric),
            (std::vector<std::string>{"0.000", "0", "1", "0.0"}));
}

TEST(Bpe, EncoderErrorsAndTrivialCases) {
  std::vector<std::string> values = {"7", "78"};
  TrainOptions opt;
  opt.merges = 0;
  Vocabulary v = train_bpe_group(empty_vocab(), values, BpeGroup::kNumeric, opt);
  BpeSegmenter seg(v, BpeGroup::kNumeric);
  EXPECT_EQ(seg.encode("7"), (std::vector<TokenId>{*v.id_of("7")}));
  EXPECT_TRUE(seg.encode("").empty());
  try {
    seg.encode("77x");
    FAIL();
  } catch (const UnknownCharacterError& e) {
    EXPECT_NE(std::string(e.what()).find("byte 2"), std::string::npos) << e.what();
  }
  // Fixed tokens are never matched inside a value, even single-character ones.
  EXPECT_THROW(seg.encode("<"), UnknownCharacterError);
}

TEST(Bpe, SameMergedSymbolAtSeveralRanks) {
  // "abc" can be built as (ab,c) and as (a,bc); both rules exist.
  std::vector<std::string> values = {"ab", "ab", "abc", "bc", "bc", "bc", "xabc", "xabc"};
  TrainOptions opt;
  opt.merges = 30;
  opt.min_pair_frequency = 1;
  Vocabulary v = train_bpe_group(empty_vocab(), values, BpeGroup::kNumeric, opt);
  auto ref = reference::train(values, 30, 1);
  ASSERT_EQ(merge_pairs(v, BpeGroup::kNumeric), merge_pairs(ref));
  BpeSegmenter seg(v, BpeGroup::kNumeric);
  for (std::string probe : {"abc", "ababc", "bcabc", "xabcbc", "abcabcx", "cba"}) {
    EXPECT_EQ(strings(v, seg.encode(probe)), reference::segment(probe, ref.merges)) << probe;
  }
}

// Randomized equivalence against the brute-force reference; the acceptance
// binary runs the full-size version of this property.
TEST(Bpe, MatchesReferenceOnRandomCorpora) {
  std::mt19937_64 rng(11);
  const std::string alphabet = "ab.1";
  for (int round = 0; round < 100; ++round) {
    std::size_t n = 1 + rng() % 50;
    std::vector<std::string> values;
    for (std::size_t i = 0; i < n; ++i) {
      std::string v;
      std::size_t len = rng() % 9;
      for (std::size_t k = 0; k < len; ++k) v += alphabet[rng() % (2 + round % 3)];
      values.push_back(v);
    }
    TrainOptions opt;
    opt.merges = rng() % 31;
    std::vector<MergeStep> log;
    Vocabulary v = train_bpe_group(empty_vocab(), values, BpeGroup::kIpAddress, opt, &log);
    auto ref = reference::train(values, opt.merges);
    ASSERT_EQ(merge_pairs(v, BpeGroup::kIpAddress), merge_pairs(ref)) << "round " << round;
    ASSERT_EQ(log.size(), ref.token_counts.size());
    for (std::size_t k = 0; k < log.size(); ++k) {
      EXPECT_EQ(log[k].token_count, ref.token_counts[k]);
    }
    BpeSegmenter seg(v, BpeGroup::kIpAddress);
    for (const std::string& value : values) {
      ASSERT_EQ(strings(v, seg.encode(value)), reference::segment(value, ref.merges));
    }
  }
}

}  // namespace
}  // namespace flowtok
