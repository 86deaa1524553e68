#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "flowtok/checksum.hpp"
#include "flowtok/schema.hpp"

namespace flowtok {

// Dense 0-based token id. Stored as 64-bit signed on disk.
using TokenId = std::int64_t;

struct MergeRule {
  std::string left;
  std::string right;
  std::string merged;   // left + right
  std::uint32_t rank;   // creation order within the group, from 0

  bool operator==(const MergeRule&) const = default;
};

// Hybrid token table.
//
// Id layout: fixed tokens first (structural tokens in column order, the row
// terminator, then categorical tokens in schema order), followed by
// alphabet characters and merged symbols in the order training created
// them. A string has exactly one id no matter how many groups produce it.
class Vocabulary {
 public:
  Vocabulary() = default;

  std::size_t size() const { return strings_.size(); }
  std::optional<TokenId> id_of(std::string_view token) const;
  const std::string& string_of(TokenId id) const;
  bool contains(TokenId id) const {
    return id >= 0 && static_cast<std::size_t>(id) < strings_.size();
  }

  std::size_t fixed_count() const { return fixed_count_; }
  bool is_fixed(TokenId id) const {
    return id >= 0 && static_cast<std::size_t>(id) < fixed_count_;
  }
  std::span<const std::string> fixed_tokens() const {
    return {strings_.data(), fixed_count_};
  }

  const std::vector<std::string>& alphabet(BpeGroup g) const {
    return alphabets_[group_index(g)];
  }
  const std::vector<MergeRule>& merges(BpeGroup g) const {
    return merges_[group_index(g)];
  }
  bool is_trained(BpeGroup g) const { return trained_[group_index(g)]; }

  // Canonical serialized form and its SHA-256. Two vocabularies compare
  // equal exactly when their serialized forms are identical.
  std::string serialize() const;
  Sha256Digest checksum() const;

  bool operator==(const Vocabulary& other) const;

 private:
  friend class VocabularyEditor;

  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const {
      return std::hash<std::string_view>{}(s);
    }
  };

  std::vector<std::string> strings_;
  std::unordered_map<std::string, TokenId, Hash, std::equal_to<>> ids_;
  std::size_t fixed_count_ = 0;
  std::array<std::vector<std::string>, kNumGroups> alphabets_;
  std::array<std::vector<MergeRule>, kNumGroups> merges_;
  std::array<bool, kNumGroups> trained_{};
};

// Mutation access for the trainer and the file loader. Keeps the id maps
// consistent; callers are responsible for the layout rules above.
class VocabularyEditor {
 public:
  explicit VocabularyEditor(Vocabulary& vocab) : v_(vocab) {}

  // Returns the existing id for `token` or appends it.
  TokenId intern(std::string_view token);
  void seal_fixed() { v_.fixed_count_ = v_.strings_.size(); }
  void add_alphabet(BpeGroup g, std::string symbol) {
    v_.alphabets_[group_index(g)].push_back(std::move(symbol));
  }
  void add_merge(BpeGroup g, MergeRule rule) {
    v_.merges_[group_index(g)].push_back(std::move(rule));
  }
  void mark_trained(BpeGroup g) { v_.trained_[group_index(g)] = true; }

 private:
  Vocabulary& v_;
};

// Fixed tokens only; every group untrained.
Vocabulary init_fixed_vocab(const SchemaConfig& schema);

void save_vocab(const Vocabulary& vocab, const std::filesystem::path& path);
Vocabulary load_vocab(const std::filesystem::path& path);
Vocabulary parse_vocab(std::string_view bytes,
                       std::string_view source_name = "<vocab>");

}  // namespace flowtok
