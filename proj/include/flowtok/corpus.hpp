#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "flowtok/checksum.hpp"
#include "flowtok/codec.hpp"
#include "flowtok/record.hpp"
#include "flowtok/vocab.hpp"

namespace flowtok {

// Corpus file layout (all integers little-endian):
//
//   offset  size  field
//        0     8  magic "FLOWTOKC"
//        8     4  u32 format version (1)
//       12    32  SHA-256 of the vocabulary's canonical form
//       44     8  u64 flow count
//       52     8  u64 token count
//       60     8  u64 character count
//       68   8*N  token ids, i64 each
inline constexpr std::array<char, 8> kCorpusMagic = {'F', 'L', 'O', 'W', 'T', 'O', 'K', 'C'};
inline constexpr std::uint32_t kCorpusVersion = 1;
inline constexpr std::size_t kCorpusHeaderSize = 68;

struct CorpusHeader {
  std::uint32_t version = kCorpusVersion;
  Sha256Digest vocab_checksum{};
  std::uint64_t flows = 0;
  std::uint64_t tokens = 0;
  std::uint64_t chars = 0;

  bool operator==(const CorpusHeader&) const = default;
};

std::array<std::uint8_t, kCorpusHeaderSize> encode_header(const CorpusHeader& header);
// Throws FormatVersionError on bad magic or version.
CorpusHeader decode_header(std::span<const std::uint8_t, kCorpusHeaderSize> bytes);

// Appends ids to a corpus file. The header is rewritten with the final
// counts by close().
class CorpusWriter {
 public:
  CorpusWriter(const std::filesystem::path& path, const Sha256Digest& vocab_checksum);

  void append(std::span<const TokenId> ids, std::uint64_t flows, std::uint64_t chars);
  const CorpusHeader& close();
  const CorpusHeader& header() const { return header_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  CorpusHeader header_;
  std::vector<char> buf_;
  bool closed_ = false;
};

class CorpusReader {
 public:
  // Validates magic, version and that the file holds exactly
  // header.tokens ids (TruncationError when shorter).
  explicit CorpusReader(const std::filesystem::path& path);

  const CorpusHeader& header() const { return header_; }

  // Throws ChecksumError unless the corpus was encoded with `vocab`.
  void require_vocab(const Vocabulary& vocab) const;

  // Reads up to out.size() ids; returns how many were read (0 at the end).
  std::size_t read(std::span<TokenId> out);
  std::vector<TokenId> read_all();

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  CorpusHeader header_;
  std::uint64_t remaining_ = 0;
  std::vector<char> buf_;
};

struct TokenizationMetrics {
  std::uint64_t flows = 0;
  std::uint64_t chars = 0;
  std::uint64_t tokens = 0;
  double compression_ratio = 0.0;  // chars / tokens; 0 when tokens == 0
  bool ratio_defined = false;
  double elapsed_seconds = 0.0;

  // Ratio rounded to two decimals, e.g. "6.18".
  std::string ratio_display() const;
  double flows_per_minute() const;
};

TokenizationMetrics compute_metrics(std::uint64_t chars, std::uint64_t tokens,
                                    std::uint64_t flows, double elapsed_seconds);

// Plain-text report, one "name: value" per line.
std::string format_metrics(const TokenizationMetrics& m);
// Machine-readable summary, schema version 1.
nlohmann::json metrics_to_json(const TokenizationMetrics& m);

// Encodes every record of `records` into a corpus file in one pass.
// Codec errors are rethrown with the failing record index prepended.
TokenizationMetrics encode_corpus(RecordStream& records, Codec& codec,
                                  const std::filesystem::path& out);

// Reads header and all ids.
std::pair<CorpusHeader, std::vector<TokenId>> read_corpus(const std::filesystem::path& path);

}  // namespace flowtok
