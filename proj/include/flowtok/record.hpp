#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flowtok/csv.hpp"
#include "flowtok/schema.hpp"

namespace flowtok {

// One prepared row: field strings aligned 1:1 with SchemaConfig::columns.
struct FlowRecord {
  std::vector<std::string> values;

  bool operator==(const FlowRecord&) const = default;
};

// Pull-style source of prepared records.
class RecordStream {
 public:
  virtual ~RecordStream() = default;
  virtual bool next(FlowRecord& record) = 0;
};

class SpanRecordStream final : public RecordStream {
 public:
  explicit SpanRecordStream(std::span<const FlowRecord> records)
      : records_(records) {}

  bool next(FlowRecord& record) override {
    if (pos_ >= records_.size()) return false;
    record = records_[pos_++];
    return true;
  }

 private:
  std::span<const FlowRecord> records_;
  std::size_t pos_ = 0;
};

// Prepared-records file: a CSV whose header is the schema's column names in
// order, followed by one row per record.
class RecordFileWriter {
 public:
  RecordFileWriter(const std::filesystem::path& path, const SchemaConfig& schema);

  void write(const FlowRecord& record);
  void close();
  std::size_t count() const { return count_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::unique_ptr<CsvWriter> csv_;
  std::size_t width_;
  std::size_t count_ = 0;
};

class RecordFileReader final : public RecordStream {
 public:
  RecordFileReader(const std::filesystem::path& path, const SchemaConfig& schema);

  bool next(FlowRecord& record) override;
  std::size_t count() const { return count_; }

 private:
  std::ifstream in_;
  std::unique_ptr<CsvReader> csv_;
  std::size_t width_;
  std::size_t count_ = 0;
};

void write_records(const std::filesystem::path& path, const SchemaConfig& schema,
                   std::span<const FlowRecord> records);
std::vector<FlowRecord> read_records(const std::filesystem::path& path,
                                     const SchemaConfig& schema);

}  // namespace flowtok
