#include "flowtok/record.hpp"

#include "flowtok/error.hpp"

namespace flowtok {

namespace {

std::vector<std::string> column_names(const SchemaConfig& schema) {
  std::vector<std::string> names;
  names.reserve(schema.columns.size());
  for (const ColumnSpec& c : schema.columns) names.push_back(c.name);
  return names;
}

}  // namespace

RecordFileWriter::RecordFileWriter(const std::filesystem::path& path,
                                   const SchemaConfig& schema)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc),
      width_(schema.columns.size()) {
  if (!out_) throw IoError("cannot create '" + path.string() + "'");
  csv_ = std::make_unique<CsvWriter>(out_);
  csv_->write_row(column_names(schema));
}

void RecordFileWriter::write(const FlowRecord& record) {
  if (record.values.size() != width_) {
    throw ValidationError("record " + std::to_string(count_) + " has " +
                          std::to_string(record.values.size()) +
                          " fields, schema has " + std::to_string(width_));
  }
  csv_->write_row(record.values);
  ++count_;
}

void RecordFileWriter::close() {
  out_.flush();
  if (!out_) throw IoError("error writing '" + path_.string() + "'");
  out_.close();
}

RecordFileReader::RecordFileReader(const std::filesystem::path& path,
                                   const SchemaConfig& schema)
    : in_(path, std::ios::binary), width_(schema.columns.size()) {
  if (!in_) throw IoError("cannot open '" + path.string() + "'");
  csv_ = std::make_unique<CsvReader>(in_, path.string());
  std::vector<std::string> header;
  if (!csv_->next(header)) {
    throw HeaderMismatchError(path.string() + ": missing header row");
  }
  if (header != column_names(schema)) {
    throw HeaderMismatchError(path.string() +
                              ": header does not match the schema's columns");
  }
}

bool RecordFileReader::next(FlowRecord& record) {
  if (!csv_->next(record.values)) {
    if (in_.bad()) throw IoError("error reading '" + csv_->source() + "'");
    return false;
  }
  if (record.values.size() != width_) {
    throw CsvDialectError(csv_->source() + ":" + std::to_string(csv_->line()) +
                          ": record " + std::to_string(count_) + " has " +
                          std::to_string(record.values.size()) +
                          " fields, expected " + std::to_string(width_));
  }
  ++count_;
  return true;
}

void write_records(const std::filesystem::path& path, const SchemaConfig& schema,
                   std::span<const FlowRecord> records) {
  RecordFileWriter w(path, schema);
  for (const FlowRecord& r : records) w.write(r);
  w.close();
}

std::vector<FlowRecord> read_records(const std::filesystem::path& path,
                                     const SchemaConfig& schema) {
  RecordFileReader r(path, schema);
  std::vector<FlowRecord> out;
  FlowRecord rec;
  while (r.next(rec)) out.push_back(rec);
  return out;
}

}  // namespace flowtok
