#include "flowtok/synth.hpp"

#include <array>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "flowtok/error.hpp"
#include "flowtok/timestamp.hpp"

namespace flowtok {

namespace {

struct Service {
  int port;
  bool udp;
  int weight;
};

constexpr std::array<Service, 10> kServices = {{
    {80, false, 22}, {443, false, 25}, {53, true, 20}, {445, false, 8},
    {22, false, 6}, {25, false, 4}, {123, true, 4}, {8080, false, 4},
    {993, false, 4}, {137, true, 3},
}};

constexpr std::array<std::string_view, 10> kTcpFlags = {
    ".AP.SF", ".AP...", ".A....", "....S.", ".A..SF",
    ".A.R..", "...R..", ".AP.S.", ".A...F", ".APRSF",
};

constexpr std::array<std::string_view, 4> kAttacks = {"pingScan", "portScan",
                                                       "bruteForce", "dos"};

class Generator {
 public:
  explicit Generator(std::uint64_t seed) : rng_(seed) {}

  std::uint64_t below(std::uint64_t n) { return rng_() % n; }
  bool chance(int percent) { return below(100) < static_cast<std::uint64_t>(percent); }

  std::string internal_host() {
    static constexpr std::array<int, 4> kSubnets = {100, 200, 210, 220};
    int subnet = kSubnets[below(kSubnets.size())];
    int host = subnet == 100 ? 1 + static_cast<int>(below(12))
                             : 1 + static_cast<int>(below(40));
    return "192.168." + std::to_string(subnet) + "." + std::to_string(host);
  }

  std::string server_host() {
    if (chance(15)) {
      static constexpr std::array<std::string_view, 3> kExternal = {
          "EXT_SERVER", "OPENSTACK_NET", "DNS"};
      if (chance(50)) return std::string(kExternal[below(kExternal.size())]);
      return std::to_string(10000 + below(9000)) + "_" + std::to_string(below(256));
    }
    return "192.168.100." + std::to_string(1 + below(12));
  }

  const Service& service() {
    int total = 0;
    for (const Service& s : kServices) total += s.weight;
    auto pick = static_cast<int>(below(static_cast<std::uint64_t>(total)));
    for (const Service& s : kServices) {
      if (pick < s.weight) return s;
      pick -= s.weight;
    }
    return kServices[0];
  }

  int ephemeral_port() { return 49152 + static_cast<int>(below(16384)); }

  // Skewed small positive integer: 1 most of the time, rarely large.
  std::uint64_t packets() {
    std::uint64_t scale = 1;
    while (scale < 100000 && chance(35)) scale *= 4;
    return 1 + below(scale);
  }

  std::string duration() {
    if (chance(45)) return "0.000";
    std::uint64_t scale = 10;
    while (scale < 1000000 && chance(40)) scale *= 10;
    std::uint64_t ms = 1 + below(scale);
    std::string frac = std::to_string(ms % 1000);
    frac.insert(0, 3 - frac.size(), '0');
    return std::to_string(ms / 1000) + "." + frac;
  }

  static std::string bytes(std::uint64_t b) {
    if (b < 1000000) return std::to_string(b);
    std::uint64_t tenths = (b + 50000) / 100000;
    return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10) + " M";
  }

  // Inter-arrival milliseconds.
  std::int64_t gap_ms() {
    if (chance(30)) return 0;
    std::uint64_t scale = 8;
    while (scale < 60000 && chance(45)) scale *= 4;
    return static_cast<std::int64_t>(below(scale));
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace

void write_synthetic_csv(std::ostream& out, const SynthOptions& options) {
  Generator gen(options.seed);
  TimestampFormat format("%Y-%m-%d %H:%M:%S.%3f");
  Timestamp now = *format.parse("2017-03-15 00:01:16.632");

  out << kCiddsHeader << '\n';
  std::string line;
  for (std::size_t i = 0; i < options.rows; ++i) {
    now.nanos += gen.gap_ms() * 1'000'000;

    std::string proto, src, dst, src_pt, dst_pt, flags;
    std::string client = gen.internal_host();
    std::string server = gen.server_host();
    const bool reply = gen.chance(45);

    int kind = static_cast<int>(gen.below(1000));
    if (kind < 30) {
      proto = "ICMP ";
      static constexpr std::array<std::string_view, 4> kIcmp = {"0.0", "8.0", "3.0", "11.0"};
      src_pt = "0";
      dst_pt = std::string(kIcmp[gen.below(kIcmp.size())]);
      flags = "......";
    } else if (kind < 35) {
      proto = "IGMP ";
      src_pt = "0";
      dst_pt = "0";
      flags = "......";
      server = "224.0.0." + std::to_string(1 + gen.below(251));
    } else {
      const Service& svc = gen.service();
      proto = svc.udp ? "UDP  " : "TCP  ";
      flags = svc.udp ? "......" : std::string(kTcpFlags[gen.below(kTcpFlags.size())]);
      src_pt = std::to_string(gen.ephemeral_port());
      dst_pt = std::to_string(svc.port);
      // Some exports carry ports as floats.
      if (gen.chance(10)) dst_pt += ".0";
    }
    src = client;
    dst = server;
    if (reply) {
      std::swap(src, dst);
      std::swap(src_pt, dst_pt);
      if (src_pt.ends_with(".0")) src_pt.resize(src_pt.size() - 2);
    }

    std::uint64_t pkts = gen.packets();
    std::uint64_t bytes = pkts * (40 + gen.below(1461));

    std::string cls = "normal", attack = "---", attack_id = "---";
    int label = static_cast<int>(gen.below(1000));
    if (label < 25 || label >= 995) {
      cls = label < 25 ? "attacker" : "victim";
      attack = std::string(kAttacks[gen.below(kAttacks.size())]);
      attack_id = std::to_string(1 + gen.below(70));
    } else if (label < 30) {
      cls = "suspicious";
    }

    line.clear();
    line += format.format(now);
    line += ',' + gen.duration();
    line += ',' + proto;
    line += ',' + src;
    line += ',' + src_pt;
    line += ',' + dst;
    line += ',' + dst_pt;
    line += ',' + std::to_string(pkts);
    line += ',' + Generator::bytes(bytes);
    line += ",1";
    line += ',' + flags;
    line += gen.chance(5) ? ",32" : ",0";
    line += ',' + cls;
    line += ',' + attack;
    line += ',' + attack_id;
    line += ",---\n";
    out << line;
  }
}

void write_synthetic_csv(const std::filesystem::path& path, const SynthOptions& options) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create '" + path.string() + "'");
  write_synthetic_csv(out, options);
  out.flush();
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

}  // namespace flowtok
