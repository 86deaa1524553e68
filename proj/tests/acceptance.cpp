// Acceptance run: one PASS/FAIL/SKIP line per criterion, exit status 1 when
// any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "flowtok/bpe.hpp"
#include "flowtok/codec.hpp"
#include "flowtok/corpus.hpp"
#include "flowtok/ingest.hpp"
#include "flowtok/synth.hpp"
#include "flowtok/vocab.hpp"
#include "support/bpe_reference.hpp"
#include "support/test_util.hpp"

namespace fs = std::filesystem;
using namespace flowtok;

namespace {

int failures = 0;

void report(const std::string& status, const std::string& id, const std::string& detail) {
  if (status == "FAIL") ++failures;
  std::cout << status << " " << id << ": " << detail << std::endl;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double x, int digits = 2) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << x;
  return os.str();
}

// The 100k synthetic corpus shared by criteria 1, 4, 5 and 6.
struct SyntheticRun {
  SchemaConfig schema;
  std::vector<FlowRecord> records;
  Vocabulary vocab;
  std::vector<MergeStep> log;
  double prepare_seconds = 0;
  double train_seconds = 0;
};

SyntheticRun build_synthetic(const testing::TempDir& dir) {
  SyntheticRun run;
  run.schema = load_schema(testing::cidds_schema_path());
  Stopwatch sw;
  fs::path csv = dir / "synthetic.csv";
  write_synthetic_csv(csv, SynthOptions{1, 100000});
  std::vector<fs::path> paths = {csv};
  run.records = prepare_records(paths, run.schema);
  run.prepare_seconds = sw.seconds();
  Stopwatch tw;
  TrainOptions opt;
  opt.merges = 1000;
  run.vocab = train_vocabulary(init_fixed_vocab(run.schema), run.records, run.schema, opt, &run.log);
  run.train_seconds = tw.seconds();
  return run;
}

void criterion_roundtrip(const SyntheticRun& syn, const testing::TempDir& dir) {
  Stopwatch sw;
  SchemaConfig schema = load_schema(testing::cidds_schema_path());
  testing::RecordGenerator gen(schema, 2024);
  auto random = gen.take(10000);
  TrainOptions opt;
  opt.merges = 300;
  Vocabulary v = train_vocabulary(init_fixed_vocab(schema), random, schema, opt);
  Codec codec(schema, v);
  std::size_t random_ok = 0;
  for (const auto& r : random) {
    auto back = codec.decode(codec.encode_row(r));
    if (back.size() == 1 && back[0] == r) ++random_ok;
  }

  // The synthetic rows go through the corpus file and the chunked decoder.
  Codec syn_codec(syn.schema, syn.vocab);
  SpanRecordStream stream(syn.records);
  fs::path corpus = dir / "roundtrip.corpus";
  encode_corpus(stream, syn_codec, corpus);
  CorpusReader reader(corpus);
  reader.require_vocab(syn.vocab);
  StreamDecoder dec(syn_codec);
  std::vector<FlowRecord> decoded;
  std::vector<TokenId> buf(1 << 16);
  while (std::size_t n = reader.read(buf)) dec.feed(std::span<const TokenId>(buf.data(), n), decoded);
  dec.finish();
  std::size_t syn_ok = 0;
  for (std::size_t i = 0; i < std::min(decoded.size(), syn.records.size()); ++i) {
    if (decoded[i] == syn.records[i]) ++syn_ok;
  }
  const bool syn_all = decoded.size() == syn.records.size() && syn_ok == syn.records.size();

  // Synthetic preparation and training are part of this suite's cost.
  double secs = sw.seconds() + syn.prepare_seconds + syn.train_seconds;
  bool pass = random_ok == random.size() && syn_all && secs < 60.0;
  report(pass ? "PASS" : "FAIL", "1 lossless round-trip",
         std::to_string(random_ok) + "/" + std::to_string(random.size()) + " random, " +
             std::to_string(syn_ok) + "/" + std::to_string(syn.records.size()) +
             " synthetic rows identical; " + fmt(secs) + " s (limit 60 s)");
}

std::vector<std::string> strings_of(const Vocabulary& v, const std::vector<TokenId>& ids) {
  std::vector<std::string> out;
  for (TokenId id : ids) out.push_back(v.string_of(id));
  return out;
}

void criterion_oracle() {
  Stopwatch sw;
  std::mt19937_64 rng(77);
  const std::vector<std::string> pool = {"a", "b", "c", "0", "1", ".", ":", "\xC3\xA9"};
  const int corpora = 600;
  int agree = 0;
  std::string first_failure;
  for (int c = 0; c < corpora; ++c) {
    std::size_t alpha = 2 + rng() % (pool.size() - 1);
    std::size_t n_values = 1 + rng() % 50;
    std::size_t n_merges = rng() % 31;
    bool weighted = c % 2 == 1;
    std::map<std::string, std::uint64_t> seen;
    std::vector<std::pair<std::string, std::uint64_t>> ref_values;
    std::vector<WeightedValue> values;
    for (std::size_t attempts = 0; ref_values.size() < n_values && attempts < 400; ++attempts) {
      std::string s;
      std::size_t len = 1 + rng() % 10;
      for (std::size_t i = 0; i < len; ++i) s += pool[rng() % alpha];
      if (seen.count(s)) continue;
      std::uint64_t w = weighted ? 1 + rng() % 5 : 1;
      seen[s] = w;
      ref_values.emplace_back(s, w);
      values.push_back({s, w});
    }
    TrainOptions opt;
    opt.merges = n_merges;
    auto ref = reference::train(ref_values, n_merges);
    std::vector<MergeStep> log;
    Vocabulary v = train_bpe_group(Vocabulary{}, values, BpeGroup::kIpAddress, opt, &log);

    bool ok = v.alphabet(BpeGroup::kIpAddress) == ref.alphabet &&
              v.merges(BpeGroup::kIpAddress).size() == ref.merges.size() &&
              log.size() == ref.token_counts.size();
    for (std::size_t i = 0; ok && i < ref.merges.size(); ++i) {
      const MergeRule& m = v.merges(BpeGroup::kIpAddress)[i];
      ok = m.left == ref.merges[i].left && m.right == ref.merges[i].right;
    }
    for (std::size_t i = 0; ok && i < log.size(); ++i) ok = log[i].token_count == ref.token_counts[i];
    if (ok) {
      BpeSegmenter seg(v, BpeGroup::kIpAddress);
      // Training values plus unseen strings over the same alphabet.
      std::vector<std::string> probes;
      for (const auto& [s, w] : ref_values) probes.push_back(s);
      for (int k = 0; k < 20; ++k) {
        std::string s;
        std::size_t len = rng() % 14;
        for (std::size_t i = 0; i < len; ++i) s += ref.alphabet[rng() % ref.alphabet.size()];
        probes.push_back(s);
      }
      for (const auto& p : probes) {
        if (strings_of(v, seg.encode(p)) != reference::segment(p, ref.merges)) {
          ok = false;
          break;
        }
      }
    }
    if (ok) {
      ++agree;
    } else if (first_failure.empty()) {
      first_failure = " first mismatch at corpus " + std::to_string(c) + ";";
    }
  }
  double secs = sw.seconds();
  bool pass = agree == corpora && secs < 60.0;
  report(pass ? "PASS" : "FAIL", "2 BPE oracle equivalence",
         std::to_string(agree) + "/" + std::to_string(corpora) +
             " corpora agree on alphabet, merges, token counts and segmentation;" + first_failure +
             " " + fmt(secs) + " s (limit 60 s)");
}

void criterion_arithmetic() {
  auto m = compute_metrics(6284718381ULL, 1016754652ULL, 31287933ULL, 4 * 3600 + 44 * 60);
  bool pass = m.ratio_display() == "6.18";
  report(pass ? "PASS" : "FAIL", "3 compression arithmetic",
         "6,284,718,381 chars / 1,016,754,652 tokens displays " + m.ratio_display() +
             " (expected 6.18)");
}

void criterion_scale(const SyntheticRun& syn, const testing::TempDir& dir) {
  Codec codec(syn.schema, syn.vocab);
  SpanRecordStream stream(syn.records);
  auto m = encode_corpus(stream, codec, dir / "scale.corpus");

  std::size_t alphabets = 0;
  for (BpeGroup g : kAllGroups) alphabets += syn.vocab.alphabet(g).size();
  std::size_t bound = syn.vocab.fixed_count() + alphabets + 3000;

  // Realized reduction of merge k = token_count(k-1) - token_count(k).
  std::ostringstream groups;
  bool monotone = true;
  for (BpeGroup g : kAllGroups) {
    std::vector<std::uint64_t> counts;
    std::vector<std::int64_t> freqs;
    for (const auto& s : syn.log) {
      if (s.group != g) continue;
      counts.push_back(s.token_count);
      if (s.step > 0) freqs.push_back(s.pair_frequency);
    }
    std::size_t rises = 0;
    std::size_t first_rise = 0;
    std::uint64_t prev = 0;
    for (std::size_t k = 1; k < counts.size(); ++k) {
      std::uint64_t red = counts[k - 1] - counts[k];
      if (k > 1 && red > prev) {
        if (rises++ == 0) first_rise = k;
      }
      prev = red;
    }
    std::size_t freq_rises = 0;
    for (std::size_t k = 1; k < freqs.size(); ++k) freq_rises += freqs[k] > freqs[k - 1];
    if (rises > 0) monotone = false;
    groups << " " << group_name(g) << ": " << (counts.empty() ? 0 : counts.size() - 1)
           << " merges, " << rises << " reduction rises";
    if (rises > 0) groups << " (first at merge " << first_rise << ")";
    groups << ", " << freq_rises << " pair-frequency rises;";
  }
  bool ratio_ok = m.compression_ratio >= 4.0;
  bool size_ok = syn.vocab.size() <= bound;
  report(ratio_ok && size_ok && monotone ? "PASS" : "FAIL", "4 synthetic scale",
         "ratio " + fmt(m.compression_ratio, 3) + " (>= 4.0 " + (ratio_ok ? "ok" : "no") +
             "), vocab " + std::to_string(syn.vocab.size()) + " (<= " + std::to_string(bound) +
             " " + (size_ok ? "ok" : "no") + "), marginal reduction non-increasing " +
             (monotone ? "ok" : "no") + ";" + groups.str());

  const char* real = std::getenv("FLOWTOK_CIDDS_DIR");
  if (real == nullptr || *real == '\0') {
    report("SKIP", "4 real dataset", "FLOWTOK_CIDDS_DIR not set");
    return;
  }
  std::vector<fs::path> paths;
  for (const auto& e : fs::directory_iterator(real)) {
    if (e.path().extension() == ".csv") paths.push_back(e.path());
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) {
    report("FAIL", "4 real dataset", std::string("no .csv files in ") + real);
    return;
  }
  Stopwatch sw;
  auto recs = prepare_records(paths, syn.schema);
  TrainOptions opt;
  opt.merges = 1000;
  Vocabulary v = train_vocabulary(init_fixed_vocab(syn.schema), recs, syn.schema, opt);
  Codec real_codec(syn.schema, v);
  SpanRecordStream real_stream(recs);
  auto rm = encode_corpus(real_stream, real_codec, dir / "real.corpus");
  bool pass = v.size() == 4241 && std::abs(rm.compression_ratio - 6.18) <= 0.01;
  report(pass ? "PASS" : "FAIL", "4 real dataset",
         std::to_string(recs.size()) + " flows from " + std::to_string(paths.size()) +
             " files, vocab " + std::to_string(v.size()) + " (expected 4241), ratio " +
             fmt(rm.compression_ratio, 3) + " (expected 6.18 +- 0.01), " + fmt(sw.seconds(), 1) +
             " s");
}

void criterion_throughput(const SyntheticRun& syn, const testing::TempDir& dir) {
  Codec codec(syn.schema, syn.vocab);
  SpanRecordStream stream(syn.records);
  auto m = encode_corpus(stream, codec, dir / "throughput.corpus");
  bool pass = m.flows_per_minute() >= 50000.0;
  report(pass ? "PASS" : "FAIL", "5 encode throughput",
         fmt(m.flows_per_minute(), 0) + " flows/min over " + std::to_string(m.flows) +
             " flows in " + fmt(m.elapsed_seconds, 3) + " s, single thread (floor 50000)");
}

void criterion_persistence(const SyntheticRun& syn, const testing::TempDir& dir) {
  std::vector<std::string> problems;

  // Committed vectors written on another host must load and re-save
  // byte for byte.
  fs::path tiny = testing::test_data_dir() / "tiny.vocab";
  Vocabulary tv = load_vocab(tiny);
  save_vocab(tv, dir / "tiny.again");
  if (testing::read_file(dir / "tiny.again") != testing::read_file(tiny)) {
    problems.push_back("tiny.vocab re-save differs");
  }
  auto [eh, eids] = read_corpus(testing::test_data_dir() / "endian.corpus");
  const std::vector<TokenId> expected_ids = {0, 1, 255, 256, 0x0102030405060708LL, 4240, 65536, -2};
  if (eids != expected_ids || eh.flows != 2 || eh.chars != 42 ||
      eh.vocab_checksum != sha256("flowtok endian vector")) {
    problems.push_back("endian.corpus contents differ");
  }

  save_vocab(syn.vocab, dir / "syn.vocab");
  if (!(load_vocab(dir / "syn.vocab") == syn.vocab)) problems.push_back("vocab round trip");

  Codec codec(syn.schema, syn.vocab);
  std::vector<TokenId> ids;
  for (const auto& r : syn.records) codec.encode_row(r, ids);
  SpanRecordStream stream(syn.records);
  auto m = encode_corpus(stream, codec, dir / "persist.corpus");
  auto [header, back] = read_corpus(dir / "persist.corpus");
  if (back != ids) problems.push_back("corpus ids");
  if (header.flows != syn.records.size() || header.tokens != ids.size() ||
      header.chars != m.chars || header.vocab_checksum != syn.vocab.checksum()) {
    problems.push_back("corpus header");
  }

  std::string detail = "committed tiny.vocab and endian.corpus vectors, " +
                       std::to_string(syn.vocab.size()) + "-entry vocab and " +
                       std::to_string(ids.size()) + "-id corpus";
  if (problems.empty()) {
    report("PASS", "6 persistence bit-exactness", detail + " reproduce exactly");
  } else {
    std::string what;
    for (const auto& p : problems) what += " " + p + ";";
    report("FAIL", "6 persistence bit-exactness", detail + ":" + what);
  }
}

int run_cli(const std::string& args) {
  std::string cmd = std::string("\"") + FLOWTOK_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  return std::system(cmd.c_str());
}

void criterion_determinism(const testing::TempDir& dir) {
  std::vector<std::string> problems;
  for (const char* run : {"a", "b"}) {
    fs::path d = dir / (std::string("det_") + run);
    fs::create_directories(d);
    std::string q = "\"" + d.string() + "/";
    if (run_cli("synth --seed 5 --rows 100000 -o " + q + "in.csv\"") != 0 ||
        run_cli("prepare " + q + "in.csv\" -o " + q + "rec.csv\"") != 0 ||
        run_cli("train-vocab --records " + q + "rec.csv\" -o " + q + "v.vocab\" --merges 1000") !=
            0 ||
        run_cli("encode --records " + q + "rec.csv\" --vocab " + q + "v.vocab\" -o " + q +
                "c.corpus\"") != 0) {
      problems.push_back(std::string("run ") + run + " failed");
    }
  }
  for (const char* f : {"in.csv", "rec.csv", "v.vocab", "c.corpus"}) {
    std::string a = testing::read_file(dir / "det_a" / f);
    std::string b = testing::read_file(dir / "det_b" / f);
    if (a.empty() || a != b) problems.push_back(std::string(f) + " differs");
  }
  if (problems.empty()) {
    report("PASS", "7 determinism",
           "two separate CLI pipeline runs (synth, prepare, train-vocab, encode) give identical "
           "bytes for every output");
  } else {
    std::string what;
    for (const auto& p : problems) what += " " + p + ";";
    report("FAIL", "7 determinism", what);
  }
}

}  // namespace

int main() {
  testing::TempDir dir("flowtok-acceptance");
  try {
    SyntheticRun syn = build_synthetic(dir);
    std::cout << "synthetic corpus: " << syn.records.size() << " flows, vocab "
              << syn.vocab.size() << ", prepared in " << fmt(syn.prepare_seconds, 3)
              << " s, trained in " << fmt(syn.train_seconds, 3) << " s" << std::endl;
    criterion_roundtrip(syn, dir);
    criterion_oracle();
    criterion_arithmetic();
    criterion_scale(syn, dir);
    criterion_throughput(syn, dir);
    criterion_persistence(syn, dir);
    criterion_determinism(dir);
  } catch (const std::exception& e) {
    std::cout << "FAIL acceptance aborted: " << e.what() << std::endl;
    return 1;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
