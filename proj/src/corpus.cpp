#include "flowtok/corpus.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <sstream>

#include "flowtok/error.hpp"

namespace flowtok {

namespace {

constexpr std::size_t kIdBatch = 1 << 16;

template <typename T>
void put_le(std::uint8_t* dst, T v) {
  auto u = static_cast<std::make_unsigned_t<T>>(v);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    dst[i] = static_cast<std::uint8_t>(u >> (8 * i));
  }
}

template <typename T>
T get_le(const std::uint8_t* src) {
  std::make_unsigned_t<T> u = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    u |= static_cast<std::make_unsigned_t<T>>(src[i]) << (8 * i);
  }
  return static_cast<T>(u);
}

}  // namespace

std::array<std::uint8_t, kCorpusHeaderSize> encode_header(const CorpusHeader& h) {
  std::array<std::uint8_t, kCorpusHeaderSize> b{};
  std::memcpy(b.data(), kCorpusMagic.data(), kCorpusMagic.size());
  put_le<std::uint32_t>(b.data() + 8, h.version);
  std::memcpy(b.data() + 12, h.vocab_checksum.data(), h.vocab_checksum.size());
  put_le<std::uint64_t>(b.data() + 44, h.flows);
  put_le<std::uint64_t>(b.data() + 52, h.tokens);
  put_le<std::uint64_t>(b.data() + 60, h.chars);
  return b;
}

CorpusHeader decode_header(std::span<const std::uint8_t, kCorpusHeaderSize> b) {
  if (std::memcmp(b.data(), kCorpusMagic.data(), kCorpusMagic.size()) != 0) {
    throw FormatVersionError("not a flowtok corpus (bad magic)");
  }
  CorpusHeader h;
  h.version = get_le<std::uint32_t>(b.data() + 8);
  if (h.version != kCorpusVersion) {
    throw FormatVersionError("unsupported corpus version " + std::to_string(h.version));
  }
  std::memcpy(h.vocab_checksum.data(), b.data() + 12, h.vocab_checksum.size());
  h.flows = get_le<std::uint64_t>(b.data() + 44);
  h.tokens = get_le<std::uint64_t>(b.data() + 52);
  h.chars = get_le<std::uint64_t>(b.data() + 60);
  return h;
}

CorpusWriter::CorpusWriter(const std::filesystem::path& path,
                           const Sha256Digest& vocab_checksum)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw IoError("cannot create corpus '" + path.string() + "'");
  header_.vocab_checksum = vocab_checksum;
  auto bytes = encode_header(header_);
  out_.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

void CorpusWriter::append(std::span<const TokenId> ids, std::uint64_t flows,
                          std::uint64_t chars) {
  buf_.resize(ids.size() * sizeof(TokenId));
  auto* p = reinterpret_cast<std::uint8_t*>(buf_.data());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    put_le<std::int64_t>(p + i * sizeof(TokenId), ids[i]);
  }
  out_.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
  header_.tokens += ids.size();
  header_.flows += flows;
  header_.chars += chars;
}

const CorpusHeader& CorpusWriter::close() {
  if (closed_) return header_;
  auto bytes = encode_header(header_);
  out_.seekp(0);
  out_.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  out_.flush();
  if (!out_) throw IoError("error writing corpus '" + path_.string() + "'");
  out_.close();
  closed_ = true;
  return header_;
}

CorpusReader::CorpusReader(const std::filesystem::path& path)
    : path_(path), in_(path, std::ios::binary) {
  if (!in_) throw IoError("cannot open corpus '" + path.string() + "'");
  std::array<std::uint8_t, kCorpusHeaderSize> bytes{};
  in_.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (in_.gcount() != static_cast<std::streamsize>(bytes.size())) {
    if (in_.gcount() >= 12) {
      decode_header(bytes);  // reports bad magic/version first
    } else if (in_.gcount() >= 8 &&
               std::memcmp(bytes.data(), kCorpusMagic.data(), 8) != 0) {
      throw FormatVersionError(path.string() + ": not a flowtok corpus (bad magic)");
    }
    throw TruncationError(path.string() + ": header is truncated");
  }
  try {
    header_ = decode_header(bytes);
  } catch (const Error& e) {
    rethrow_with_context(e, path.string());
  }

  std::uintmax_t size = std::filesystem::file_size(path);
  std::uintmax_t expected = kCorpusHeaderSize + header_.tokens * sizeof(TokenId);
  if (size < expected) {
    throw TruncationError(path.string() + ": header promises " +
                          std::to_string(header_.tokens) + " ids but file has room for " +
                          std::to_string((size - kCorpusHeaderSize) / sizeof(TokenId)));
  }
  if (size > expected) {
    throw FormatVersionError(path.string() + ": " + std::to_string(size - expected) +
                             " trailing bytes after the last id");
  }
  remaining_ = header_.tokens;
}

void CorpusReader::require_vocab(const Vocabulary& vocab) const {
  if (vocab.checksum() != header_.vocab_checksum) {
    throw ChecksumError(path_.string() + ": corpus was encoded with vocabulary " +
                        to_hex(header_.vocab_checksum) + ", not " +
                        to_hex(vocab.checksum()));
  }
}

std::size_t CorpusReader::read(std::span<TokenId> out) {
  std::size_t n = static_cast<std::size_t>(
      std::min<std::uint64_t>(out.size(), remaining_));
  if (n == 0) return 0;
  buf_.resize(n * sizeof(TokenId));
  in_.read(buf_.data(), static_cast<std::streamsize>(buf_.size()));
  if (in_.gcount() != static_cast<std::streamsize>(buf_.size())) {
    throw TruncationError(path_.string() + ": unexpected end of id data");
  }
  const auto* p = reinterpret_cast<const std::uint8_t*>(buf_.data());
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = get_le<std::int64_t>(p + i * sizeof(TokenId));
  }
  remaining_ -= n;
  return n;
}

std::vector<TokenId> CorpusReader::read_all() {
  std::vector<TokenId> ids(static_cast<std::size_t>(remaining_));
  std::size_t got = 0;
  while (got < ids.size()) {
    got += read(std::span<TokenId>(ids).subspan(got));
  }
  return ids;
}

std::pair<CorpusHeader, std::vector<TokenId>> read_corpus(
    const std::filesystem::path& path) {
  CorpusReader reader(path);
  auto ids = reader.read_all();
  return {reader.header(), std::move(ids)};
}

std::string TokenizationMetrics::ratio_display() const {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", ratio_defined ? compression_ratio : 0.0);
  return buf;
}

double TokenizationMetrics::flows_per_minute() const {
  if (elapsed_seconds <= 0.0) return 0.0;
  return static_cast<double>(flows) * 60.0 / elapsed_seconds;
}

TokenizationMetrics compute_metrics(std::uint64_t chars, std::uint64_t tokens,
                                    std::uint64_t flows, double elapsed_seconds) {
  TokenizationMetrics m;
  m.chars = chars;
  m.tokens = tokens;
  m.flows = flows;
  m.elapsed_seconds = elapsed_seconds;
  if (tokens > 0) {
    m.compression_ratio = static_cast<double>(chars) / static_cast<double>(tokens);
    m.ratio_defined = true;
  }
  return m;
}

std::string format_metrics(const TokenizationMetrics& m) {
  std::ostringstream os;
  os << "flows: " << m.flows << '\n'
     << "characters: " << m.chars << '\n'
     << "tokens: " << m.tokens << '\n'
     << "compression ratio: " << m.ratio_display()
     << (m.ratio_defined ? "" : " (undefined, no tokens)") << '\n';
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", m.elapsed_seconds);
  os << "elapsed seconds: " << buf << '\n';
  std::snprintf(buf, sizeof(buf), "%.0f", m.flows_per_minute());
  os << "flows per minute: " << buf << '\n';
  return os.str();
}

nlohmann::json metrics_to_json(const TokenizationMetrics& m) {
  return {
      {"report_version", 1},
      {"flows", m.flows},
      {"chars", m.chars},
      {"tokens", m.tokens},
      {"compression_ratio", m.compression_ratio},
      {"compression_ratio_display", m.ratio_display()},
      {"ratio_defined", m.ratio_defined},
      {"elapsed_seconds", m.elapsed_seconds},
      {"flows_per_minute", m.flows_per_minute()},
  };
}

TokenizationMetrics encode_corpus(RecordStream& records, Codec& codec,
                                  const std::filesystem::path& out) {
  auto start = std::chrono::steady_clock::now();
  CorpusWriter writer(out, codec.vocab().checksum());

  std::vector<TokenId> batch;
  batch.reserve(kIdBatch + 256);
  std::uint64_t batch_flows = 0, batch_chars = 0;
  std::uint64_t index = 0;
  FlowRecord record;
  while (records.next(record)) {
    try {
      batch_chars += codec.serialized_chars(record);
      codec.encode_row(record, batch);
    } catch (const Error& e) {
      rethrow_with_context(e, "record " + std::to_string(index));
    }
    ++batch_flows;
    ++index;
    if (batch.size() >= kIdBatch) {
      writer.append(batch, batch_flows, batch_chars);
      batch.clear();
      batch_flows = batch_chars = 0;
    }
  }
  writer.append(batch, batch_flows, batch_chars);
  const CorpusHeader& h = writer.close();

  std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  return compute_metrics(h.chars, h.tokens, h.flows, elapsed.count());
}

}  // namespace flowtok
