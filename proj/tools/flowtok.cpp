// flowtok command-line front end. Run `flowtok --help` for usage.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "flowtok/bpe.hpp"
#include "flowtok/codec.hpp"
#include "flowtok/corpus.hpp"
#include "flowtok/csv.hpp"
#include "flowtok/error.hpp"
#include "flowtok/ingest.hpp"
#include "flowtok/record.hpp"
#include "flowtok/schema.hpp"
#include "flowtok/synth.hpp"
#include "flowtok/timestamp.hpp"
#include "flowtok/vocab.hpp"

namespace fs = std::filesystem;
using namespace flowtok;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitVerifyFailed = 3;

// FLOWTOK_LOG: quiet | info (default) | debug
enum class Verbosity { kQuiet, kInfo, kDebug };

Verbosity verbosity() {
  static const Verbosity v = [] {
    const char* env = std::getenv("FLOWTOK_LOG");
    std::string s = env ? env : "info";
    if (s == "quiet" || s == "0") return Verbosity::kQuiet;
    if (s == "debug" || s == "2") return Verbosity::kDebug;
    return Verbosity::kInfo;
  }();
  return v;
}

void log_info(const std::string& msg) {
  if (verbosity() >= Verbosity::kInfo) std::cerr << "flowtok: " << msg << '\n';
}

void log_debug(const std::string& msg) {
  if (verbosity() >= Verbosity::kDebug) std::cerr << "flowtok: " << msg << '\n';
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

struct PrepareArgs {
  std::vector<std::string> inputs;
  std::string schema;
  std::string out;
};

int cmd_prepare(const PrepareArgs& a) {
  SchemaConfig schema = load_schema(a.schema);
  std::vector<fs::path> paths(a.inputs.begin(), a.inputs.end());
  auto start = std::chrono::steady_clock::now();
  PrepareSummary summary;
  std::vector<FlowRecord> records = prepare_records(paths, schema, &summary);
  write_records(a.out, schema, records);

  std::cout << "files: " << paths.size() << '\n' << "records: " << summary.rows << '\n';
  if (summary.first && summary.last) {
    TimestampFormat f("%Y-%m-%d %H:%M:%S.%3f");
    std::cout << "first: " << f.format(*summary.first) << '\n'
              << "last: " << f.format(*summary.last) << '\n';
  }
  log_info("prepared " + std::to_string(summary.rows) + " records in " +
           fixed(seconds_since(start), 3) + " s");
  return 0;
}

struct TrainArgs {
  std::string records;
  std::string schema;
  std::string out;
  std::string base;
  std::string log;
  std::vector<std::string> groups;
  std::size_t merges = 1000;
  std::int64_t min_pair_frequency = 2;
  bool weighted = false;
};

void write_merge_log(const fs::path& path, const std::vector<MergeStep>& steps) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create '" + path.string() + "'");
  CsvWriter csv(out);
  csv.write_row(std::vector<std::string>{"group", "step", "left", "right", "pair_frequency",
                                         "token_count", "vocab_size"});
  for (const MergeStep& s : steps) {
    csv.write_row(std::vector<std::string>{
        std::string(group_name(s.group)), std::to_string(s.step), s.left, s.right,
        std::to_string(s.pair_frequency), std::to_string(s.token_count),
        std::to_string(s.vocab_size)});
  }
  out.flush();
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

int cmd_train_vocab(const TrainArgs& a) {
  std::vector<BpeGroup> only;
  for (const std::string& name : a.groups) only.push_back(*parse_group(name));

  SchemaConfig schema = load_schema(a.schema);
  Vocabulary base = a.base.empty() ? init_fixed_vocab(schema) : load_vocab(a.base);
  if (!a.base.empty()) {
    // The base must carry this schema's fixed tokens.
    Codec check(schema, base);
    (void)check;
  }
  auto start = std::chrono::steady_clock::now();
  std::vector<FlowRecord> records = read_records(a.records, schema);
  log_info("loaded " + std::to_string(records.size()) + " records");

  TrainOptions opt;
  opt.merges = a.merges;
  opt.min_pair_frequency = a.min_pair_frequency;
  opt.weight_by_frequency = a.weighted;
  std::vector<MergeStep> steps;
  Vocabulary vocab = train_vocabulary(std::move(base), records, schema, opt, &steps, only);
  save_vocab(vocab, a.out);
  if (!a.log.empty()) write_merge_log(a.log, steps);
  for (const MergeStep& s : steps) {
    if (s.step > 0 && s.step % 100 == 0) {
      log_debug(std::string(group_name(s.group)) + " step " + std::to_string(s.step) +
                ": " + std::to_string(s.token_count) + " tokens");
    }
  }

  std::cout << "fixed tokens: " << vocab.fixed_count() << '\n';
  for (BpeGroup g : kAllGroups) {
    if (!vocab.is_trained(g)) continue;
    std::cout << "group " << group_name(g) << ": alphabet " << vocab.alphabet(g).size()
              << ", merges " << vocab.merges(g).size() << '\n';
  }
  std::cout << "vocabulary size: " << vocab.size() << '\n'
            << "checksum: " << to_hex(vocab.checksum()) << '\n';
  log_info("trained in " + fixed(seconds_since(start), 3) + " s");
  return 0;
}

struct EncodeArgs {
  std::string records;
  std::string schema;
  std::string vocab;
  std::string out;
  std::string report;
};

int cmd_encode(const EncodeArgs& a) {
  SchemaConfig schema = load_schema(a.schema);
  Vocabulary vocab = load_vocab(a.vocab);
  Codec codec(schema, vocab);
  RecordFileReader reader(a.records, schema);
  TokenizationMetrics m = encode_corpus(reader, codec, a.out);
  std::cout << format_metrics(m);
  if (!a.report.empty()) {
    std::ofstream out(a.report, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create '" + a.report + "'");
    out << metrics_to_json(m).dump(2) << '\n';
  }
  return 0;
}

struct DecodeArgs {
  std::string corpus;
  std::string schema;
  std::string vocab;
  std::string out;
  std::string verify;
};

int cmd_decode(const DecodeArgs& a) {
  SchemaConfig schema = load_schema(a.schema);
  Vocabulary vocab = load_vocab(a.vocab);
  Codec codec(schema, vocab);
  CorpusReader corpus(a.corpus);
  corpus.require_vocab(vocab);

  std::unique_ptr<RecordFileWriter> writer;
  if (!a.out.empty()) writer = std::make_unique<RecordFileWriter>(a.out, schema);
  std::unique_ptr<RecordFileReader> original;
  if (!a.verify.empty()) original = std::make_unique<RecordFileReader>(a.verify, schema);

  StreamDecoder decoder(codec);
  std::vector<TokenId> ids(1 << 16);
  std::vector<FlowRecord> batch;
  std::uint64_t decoded = 0, matched = 0;
  FlowRecord expected;
  while (std::size_t n = corpus.read(ids)) {
    batch.clear();
    decoder.feed(std::span<const TokenId>(ids).first(n), batch);
    for (const FlowRecord& r : batch) {
      if (writer) writer->write(r);
      if (original && original->next(expected) && expected == r) ++matched;
    }
    decoded += batch.size();
  }
  decoder.finish();
  if (writer) writer->close();

  std::cout << "records: " << decoded << '\n';
  if (corpus.header().flows != decoded) {
    throw MalformedStreamError("corpus header promises " +
                               std::to_string(corpus.header().flows) + " flows, decoded " +
                               std::to_string(decoded));
  }
  if (original) {
    std::uint64_t total = decoded;
    while (original->next(expected)) ++total;  // rows missing from the corpus
    double pct = total == 0 ? 100.0 : 100.0 * static_cast<double>(matched) /
                                          static_cast<double>(total);
    std::cout << "round-trip accuracy: " << fixed(pct, 2) << "% (" << matched << "/" << total
              << " records)\n";
    if (matched != total) return kExitVerifyFailed;
  }
  return 0;
}

struct SynthArgs {
  std::uint64_t seed = 1;
  std::size_t rows = 1000;
  std::string out;
};

int cmd_synth(const SynthArgs& a) {
  write_synthetic_csv(a.out, {a.seed, a.rows});
  log_info("wrote " + std::to_string(a.rows) + " rows to " + a.out);
  return 0;
}

struct InferArgs {
  std::vector<std::string> inputs;
  std::vector<std::string> columns;
};

// Prints schema value lines for the given columns: distinct cells in
// first-seen order, quoted, with the default token.
int cmd_infer_categories(const InferArgs& a) {
  std::vector<std::vector<std::string>> seen(a.columns.size());
  std::vector<std::unordered_map<std::string, std::size_t>> counts(a.columns.size());
  for (const std::string& path : a.inputs) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    CsvReader csv(in, path);
    std::vector<std::string> row;
    if (!csv.next(row)) throw HeaderMismatchError(path + ": missing header row");
    std::vector<std::size_t> idx;
    for (const std::string& c : a.columns) {
      auto it = std::find(row.begin(), row.end(), c);
      if (it == row.end()) throw HeaderMismatchError(path + ": no column '" + c + "'");
      idx.push_back(static_cast<std::size_t>(it - row.begin()));
    }
    const std::size_t width = row.size();
    while (csv.next(row)) {
      if (row.size() != width) {
        throw CsvDialectError(path + ":" + std::to_string(csv.line()) + ": ragged row");
      }
      for (std::size_t k = 0; k < idx.size(); ++k) {
        if (counts[k][row[idx[k]]]++ == 0) seen[k].push_back(row[idx[k]]);
      }
    }
  }
  for (std::size_t k = 0; k < a.columns.size(); ++k) {
    std::cout << "# " << a.columns[k] << ": " << seen[k].size() << " values\n";
    for (const std::string& v : seen[k]) {
      std::string quoted = "\"";
      for (char c : v) {
        if (c == '"' || c == '\\') quoted += '\\';
        if (c == '\n') { quoted += "\\n"; continue; }
        if (c == '\t') { quoted += "\\t"; continue; }
        quoted += c;
      }
      quoted += '"';
      std::cout << "    " << quoted << "  # " << counts[k][v] << '\n';
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flowtok: lossless hybrid tokenizer for NetFlow-style CSV"};
  app.require_subcommand(1);
  app.footer(
      "Exit codes: 0 ok, 2 usage, 3 verification mismatch, 10-25 errors "
      "(see README).\nSet FLOWTOK_LOG=quiet|info|debug for stderr verbosity.");

  const std::string default_schema = std::string(FLOWTOK_DATA_DIR) + "/cidds001.schema";

  PrepareArgs prep;
  prep.schema = default_schema;
  auto* prepare = app.add_subcommand("prepare", "CSV files -> prepared records file");
  prepare->add_option("inputs", prep.inputs, "Raw CSV files, concatenated in this order")
      ->required()
      ->check(CLI::ExistingFile);
  prepare->add_option("--schema", prep.schema, "Schema file")->check(CLI::ExistingFile);
  prepare->add_option("-o,--out", prep.out, "Prepared records output")->required();

  TrainArgs tr;
  tr.schema = default_schema;
  auto* train = app.add_subcommand("train-vocab", "Prepared records -> vocabulary file");
  train->add_option("--records", tr.records, "Prepared records file")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("--schema", tr.schema, "Schema file")->check(CLI::ExistingFile);
  train->add_option("-o,--out", tr.out, "Vocabulary output")->required();
  train->add_option("--merges", tr.merges, "Merge rules per group")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  train->add_option("--min-pair-frequency", tr.min_pair_frequency,
                    "Stop when the best pair is seen fewer times")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  train->add_flag("--weighted", tr.weighted, "Weight values by occurrence count");
  train->add_option("--from", tr.base, "Continue from this vocabulary")
      ->check(CLI::ExistingFile);
  train->add_option("--groups", tr.groups, "Only train these groups (ip, port, numeric)")
      ->delimiter(',')
      ->check(CLI::IsMember({"ip", "port", "numeric"}));
  train->add_option("--log", tr.log, "Per-merge-step CSV log");

  EncodeArgs enc;
  enc.schema = default_schema;
  auto* encode = app.add_subcommand("encode", "Prepared records -> token corpus");
  encode->add_option("--records", enc.records, "Prepared records file")
      ->required()
      ->check(CLI::ExistingFile);
  encode->add_option("--schema", enc.schema, "Schema file")->check(CLI::ExistingFile);
  encode->add_option("--vocab", enc.vocab, "Vocabulary file")
      ->required()
      ->check(CLI::ExistingFile);
  encode->add_option("-o,--out", enc.out, "Corpus output")->required();
  encode->add_option("--report", enc.report, "JSON metrics report");

  DecodeArgs dec;
  dec.schema = default_schema;
  auto* decode = app.add_subcommand("decode", "Token corpus -> prepared records");
  decode->add_option("--corpus", dec.corpus, "Corpus file")
      ->required()
      ->check(CLI::ExistingFile);
  decode->add_option("--schema", dec.schema, "Schema file")->check(CLI::ExistingFile);
  decode->add_option("--vocab", dec.vocab, "Vocabulary file")
      ->required()
      ->check(CLI::ExistingFile);
  auto* dec_out = decode->add_option("-o,--out", dec.out, "Decoded records output");
  auto* dec_verify = decode->add_option("--verify", dec.verify,
                                        "Compare against this prepared records file")
                         ->check(CLI::ExistingFile);
  decode->callback([&] {
    if (dec_out->count() == 0 && dec_verify->count() == 0) {
      throw CLI::ValidationError("decode", "need --out, --verify or both");
    }
  });

  SynthArgs syn;
  auto* synth = app.add_subcommand("synth", "Write a synthetic CIDDS-shaped CSV");
  synth->add_option("--seed", syn.seed, "Random seed")->capture_default_str();
  synth->add_option("--rows", syn.rows, "Row count")->capture_default_str();
  synth->add_option("-o,--out", syn.out, "CSV output")->required();

  InferArgs inf;
  auto* infer = app.add_subcommand("infer-categories",
                                   "Print schema value lines for categorical columns");
  infer->add_option("inputs", inf.inputs, "Raw CSV files")
      ->required()
      ->check(CLI::ExistingFile);
  infer->add_option("--column", inf.columns, "Column to scan (repeatable)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*prepare) return cmd_prepare(prep);
    if (*train) return cmd_train_vocab(tr);
    if (*encode) return cmd_encode(enc);
    if (*decode) return cmd_decode(dec);
    if (*synth) return cmd_synth(syn);
    if (*infer) return cmd_infer_categories(inf);
  } catch (const Error& e) {
    std::cerr << "flowtok: error [" << error_code_name(e.code()) << "]: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "flowtok: internal error: " << e.what() << '\n';
    return 1;
  }
  return kExitUsage;
}
