#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string_view>

namespace flowtok {

// Header of the CIDDS-001 internal traffic CSVs.
inline constexpr std::string_view kCiddsHeader =
    "Date first seen,Duration,Proto,Src IP Addr,Src Pt,Dst IP Addr,Dst Pt,"
    "Packets,Bytes,Flows,Flags,Tos,class,attackType,attackID,attackDescription";

struct SynthOptions {
  std::uint64_t seed = 1;
  std::size_t rows = 1000;
};

// Deterministic CIDDS-shaped rows with monotone timestamps. Output depends
// only on the options (mt19937_64 with integer-only sampling), so it is
// identical across platforms.
void write_synthetic_csv(std::ostream& out, const SynthOptions& options);
void write_synthetic_csv(const std::filesystem::path& path, const SynthOptions& options);

}  // namespace flowtok
