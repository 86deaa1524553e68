#include "flowtok/bpe.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <unordered_set>

#include "flowtok/error.hpp"
#include "flowtok/utf8.hpp"

namespace flowtok {

namespace {

constexpr std::uint64_t pair_key(std::uint64_t left, std::uint64_t right) {
  return left << 32 | right;
}

// Incremental pair-count trainer for a single group. Symbols are local
// indices into `symbols_`; only words containing the merged pair are
// revisited after each merge.
class GroupTrainer {
 public:
  GroupTrainer(Vocabulary& vocab, BpeGroup group, const TrainOptions& options,
               std::vector<MergeStep>* log)
      : vocab_(vocab), editor_(vocab), group_(group), options_(options),
        log_(log), queue_(CandidateOrder{&symbols_}) {}

  void run(std::span<const WeightedValue> values);

 private:
  struct Word {
    std::vector<std::uint32_t> syms;
    std::uint64_t weight;
  };
  struct Candidate {
    std::int64_t count;
    std::uint32_t left;
    std::uint32_t right;
  };
  // Highest count first, then (left, right) in lexicographic string order.
  struct CandidateOrder {
    const std::vector<std::string>* symbols;
    bool operator()(const Candidate& a, const Candidate& b) const {
      if (a.count != b.count) return a.count > b.count;
      const auto& s = *symbols;
      if (a.left != b.left) return s[a.left] < s[b.left];
      return s[a.right] < s[b.right];
    }
  };

  std::uint32_t symbol(std::string_view text);
  void add_pairs(std::uint32_t word, int sign, bool index_new,
                 std::uint32_t only_with = kNone);
  void touch(std::uint64_t key);
  void log_step(std::size_t step, const Candidate* merged);

  static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

  Vocabulary& vocab_;
  VocabularyEditor editor_;
  BpeGroup group_;
  const TrainOptions& options_;
  std::vector<MergeStep>* log_;

  std::vector<std::string> symbols_;
  std::unordered_map<std::string, std::uint32_t> symbol_ids_;
  std::vector<Word> words_;
  std::unordered_map<std::uint64_t, std::int64_t> counts_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> where_;
  std::set<Candidate, CandidateOrder> queue_;
  std::unordered_set<std::uint64_t> dirty_;
  std::uint64_t token_count_ = 0;
};

std::uint32_t GroupTrainer::symbol(std::string_view text) {
  auto it = symbol_ids_.find(std::string(text));
  if (it != symbol_ids_.end()) return it->second;
  auto id = static_cast<std::uint32_t>(symbols_.size());
  symbols_.emplace_back(text);
  symbol_ids_.emplace(symbols_.back(), id);
  return id;
}

void GroupTrainer::touch(std::uint64_t key) {
  if (!dirty_.insert(key).second) return;
  auto it = counts_.find(key);
  if (it != counts_.end() && it->second > 0) {
    queue_.erase(Candidate{it->second, static_cast<std::uint32_t>(key >> 32),
                           static_cast<std::uint32_t>(key)});
  }
}

// Adds (sign=+1) or removes (sign=-1) the word's adjacent pairs from the
// counts. With `index_new`, the word is recorded under every pair that
// involves `only_with` (or every pair when only_with is kNone).
void GroupTrainer::add_pairs(std::uint32_t w, int sign, bool index_new,
                             std::uint32_t only_with) {
  const Word& word = words_[w];
  const auto delta = sign * static_cast<std::int64_t>(word.weight);
  for (std::size_t i = 0; i + 1 < word.syms.size(); ++i) {
    std::uint32_t a = word.syms[i], b = word.syms[i + 1];
    std::uint64_t key = pair_key(a, b);
    touch(key);
    counts_[key] += delta;
    if (index_new && (only_with == kNone || a == only_with || b == only_with)) {
      auto& list = where_[key];
      if (list.empty() || list.back() != w) list.push_back(w);
    }
  }
}

void GroupTrainer::log_step(std::size_t step, const Candidate* merged) {
  if (log_ == nullptr) return;
  MergeStep s;
  s.group = group_;
  s.step = step;
  if (merged != nullptr) {
    s.left = symbols_[merged->left];
    s.right = symbols_[merged->right];
    s.pair_frequency = merged->count;
  }
  s.token_count = token_count_;
  s.vocab_size = vocab_.size();
  log_->push_back(std::move(s));
}

void GroupTrainer::run(std::span<const WeightedValue> values) {
  // Alphabet in first-seen order.
  words_.reserve(values.size());
  for (const WeightedValue& v : values) {
    Word word;
    word.weight = v.weight;
    utf8::for_each_char(v.value, [&](std::size_t offset, std::string_view ch) {
      if (ch.size() == 1 && kReservedCharacters.find(ch[0]) != std::string_view::npos) {
        throw ReservedCharacterError(
            "value '" + v.value + "' (group " + std::string(group_name(group_)) +
            ") contains reserved character '" + std::string(ch) +
            "' at byte " + std::to_string(offset));
      }
      std::size_t before = symbols_.size();
      std::uint32_t id = symbol(ch);
      if (symbols_.size() != before) {
        editor_.intern(ch);
        editor_.add_alphabet(group_, std::string(ch));
      }
      word.syms.push_back(id);
    });
    token_count_ += word.weight * word.syms.size();
    words_.push_back(std::move(word));
  }

  for (std::uint32_t w = 0; w < words_.size(); ++w) add_pairs(w, +1, true);
  for (std::uint64_t key : dirty_) {
    std::int64_t c = counts_[key];
    if (c > 0) {
      queue_.insert(Candidate{c, static_cast<std::uint32_t>(key >> 32),
                              static_cast<std::uint32_t>(key)});
    }
  }
  dirty_.clear();
  log_step(0, nullptr);

  std::vector<std::uint32_t> visited(words_.size(), 0);
  std::vector<std::uint32_t> merged_syms;
  for (std::uint32_t rank = 0; rank < options_.merges; ++rank) {
    if (queue_.empty()) break;
    const Candidate best = *queue_.begin();
    if (best.count < options_.min_pair_frequency) break;

    const std::uint32_t left = best.left, right = best.right;
    const std::uint32_t merged = symbol(symbols_[left] + symbols_[right]);
    editor_.intern(symbols_[merged]);
    editor_.add_merge(group_, MergeRule{symbols_[left], symbols_[right],
                                        symbols_[merged], rank});

    const std::uint64_t best_key = pair_key(left, right);
    std::vector<std::uint32_t> candidates = std::move(where_[best_key]);
    where_.erase(best_key);

    for (std::uint32_t w : candidates) {
      if (visited[w] == rank + 1) continue;
      visited[w] = rank + 1;
      Word& word = words_[w];
      bool present = false;
      for (std::size_t i = 0; i + 1 < word.syms.size(); ++i) {
        if (word.syms[i] == left && word.syms[i + 1] == right) {
          present = true;
          break;
        }
      }
      if (!present) continue;

      add_pairs(w, -1, false);
      merged_syms.clear();
      for (std::size_t i = 0; i < word.syms.size();) {
        if (i + 1 < word.syms.size() && word.syms[i] == left &&
            word.syms[i + 1] == right) {
          merged_syms.push_back(merged);
          i += 2;
        } else {
          merged_syms.push_back(word.syms[i]);
          ++i;
        }
      }
      token_count_ -= word.weight * (word.syms.size() - merged_syms.size());
      word.syms.assign(merged_syms.begin(), merged_syms.end());
      add_pairs(w, +1, true, merged);
    }

    for (std::uint64_t key : dirty_) {
      auto it = counts_.find(key);
      if (it == counts_.end()) continue;
      if (it->second > 0) {
        queue_.insert(Candidate{it->second, static_cast<std::uint32_t>(key >> 32),
                                static_cast<std::uint32_t>(key)});
      } else {
        counts_.erase(it);
      }
    }
    dirty_.clear();
    log_step(rank + 1, &best);
  }
  editor_.mark_trained(group_);
}

template <typename Fn>
void for_each_group_value(std::span<const FlowRecord> records,
                          const SchemaConfig& schema, BpeGroup group, Fn&& fn) {
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    const ColumnSpec& col = schema.columns[c];
    if (!col.is_categorical() && col.group() == group) cols.push_back(c);
  }
  for (const FlowRecord& r : records) {
    for (std::size_t c : cols) fn(r.values[c]);
  }
}

}  // namespace

std::vector<WeightedValue> collect_value_counts(std::span<const FlowRecord> records,
                                                const SchemaConfig& schema,
                                                BpeGroup group) {
  std::vector<WeightedValue> out;
  std::unordered_map<std::string, std::size_t> index;
  for_each_group_value(records, schema, group, [&](const std::string& v) {
    auto [it, inserted] = index.try_emplace(v, out.size());
    if (inserted) {
      out.push_back({v, 1});
    } else {
      ++out[it->second].weight;
    }
  });
  return out;
}

std::vector<std::string> collect_unique_values(std::span<const FlowRecord> records,
                                               const SchemaConfig& schema,
                                               BpeGroup group) {
  std::vector<std::string> out;
  for (WeightedValue& wv : collect_value_counts(records, schema, group)) {
    out.push_back(std::move(wv.value));
  }
  return out;
}

Vocabulary train_bpe_group(Vocabulary vocab, std::span<const WeightedValue> values,
                           BpeGroup group, const TrainOptions& options,
                           std::vector<MergeStep>* log) {
  if (vocab.is_trained(group)) {
    throw GroupAlreadyTrainedError("group '" + std::string(group_name(group)) +
                                   "' is already trained in this vocabulary");
  }
  GroupTrainer(vocab, group, options, log).run(values);
  return vocab;
}

Vocabulary train_bpe_group(Vocabulary vocab, std::span<const std::string> values,
                           BpeGroup group, const TrainOptions& options,
                           std::vector<MergeStep>* log) {
  std::vector<WeightedValue> weighted;
  weighted.reserve(values.size());
  for (const std::string& v : values) weighted.push_back({v, 1});
  return train_bpe_group(std::move(vocab), weighted, group, options, log);
}

Vocabulary train_vocabulary(Vocabulary base, std::span<const FlowRecord> records,
                            const SchemaConfig& schema, const TrainOptions& options,
                            std::vector<MergeStep>* log,
                            std::span<const BpeGroup> only) {
  for (BpeGroup g : kAllGroups) {
    if (!only.empty() && std::find(only.begin(), only.end(), g) == only.end()) {
      continue;
    }
    std::vector<WeightedValue> values = collect_value_counts(records, schema, g);
    if (!options.weight_by_frequency) {
      for (WeightedValue& v : values) v.weight = 1;
    }
    base = train_bpe_group(std::move(base), values, g, options, log);
  }
  return base;
}

BpeSegmenter::BpeSegmenter(const Vocabulary& vocab, BpeGroup group)
    : vocab_(&vocab), group_(group), ascii_(128, -1) {
  for (int c = 0; c < 128; ++c) {
    const char ch = static_cast<char>(c);
    if (auto id = vocab.id_of(std::string_view(&ch, 1)); id && !vocab.is_fixed(*id)) {
      ascii_[c] = *id;
    }
  }
  for (const MergeRule& r : vocab.merges(group)) {
    TokenId l = *vocab.id_of(r.left), rt = *vocab.id_of(r.right);
    rules_[pair_key(static_cast<std::uint64_t>(l), static_cast<std::uint64_t>(rt))]
        .push_back(Rule{r.rank, *vocab.id_of(r.merged)});
  }
}

TokenId BpeSegmenter::char_id(std::string_view ch, std::string_view value,
                              std::size_t offset) const {
  if (ch.size() == 1 && static_cast<unsigned char>(ch[0]) < 128) {
    TokenId id = ascii_[static_cast<unsigned char>(ch[0])];
    if (id >= 0) return id;
  } else if (auto id = vocab_->id_of(ch); id && !vocab_->is_fixed(*id)) {
    return *id;
  }
  throw UnknownCharacterError("character '" + std::string(ch) + "' at byte " +
                              std::to_string(offset) + " of value '" +
                              std::string(value) + "' is not in the vocabulary");
}

void BpeSegmenter::encode(std::string_view value, std::vector<TokenId>& out) const {
  std::vector<TokenId> syms;
  syms.reserve(value.size());
  utf8::for_each_char(value, [&](std::size_t offset, std::string_view ch) {
    syms.push_back(char_id(ch, value, offset));
  });

  // Applying rules strictly by rank is equivalent to repeatedly applying the
  // lowest-ranked rule (at or above the last applied rank) that matches
  // somewhere: rules that match nowhere are no-ops.
  std::uint32_t floor = 0;
  while (syms.size() > 1 && !rules_.empty()) {
    std::uint32_t best_rank = std::numeric_limits<std::uint32_t>::max();
    TokenId best_left = -1, best_right = -1, best_merged = -1;
    for (std::size_t i = 0; i + 1 < syms.size(); ++i) {
      auto it = rules_.find(pair_key(static_cast<std::uint64_t>(syms[i]),
                                     static_cast<std::uint64_t>(syms[i + 1])));
      if (it == rules_.end()) continue;
      for (const Rule& r : it->second) {
        if (r.rank < floor) continue;
        if (r.rank < best_rank) {
          best_rank = r.rank;
          best_left = syms[i];
          best_right = syms[i + 1];
          best_merged = r.merged;
        }
        break;
      }
    }
    if (best_merged < 0) break;

    std::size_t w = 0;
    for (std::size_t i = 0; i < syms.size();) {
      if (i + 1 < syms.size() && syms[i] == best_left && syms[i + 1] == best_right) {
        syms[w++] = best_merged;
        i += 2;
      } else {
        syms[w++] = syms[i++];
      }
    }
    syms.resize(w);
    floor = best_rank + 1;
  }
  out.insert(out.end(), syms.begin(), syms.end());
}

}  // namespace flowtok
