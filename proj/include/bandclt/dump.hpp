#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "bandclt/matgen.hpp"

namespace bandclt {

/// "bandmat v1" binary layout, all integers little-endian:
///   char[12]  magic "bandmat v1\0\0"
///   u64 n, u64 b, u32 topology, u32 reserved (0), u64 seed, u64 replicate
///   n * (2b+1) complex64 entries (float32 re, float32 im) in band order
struct BandmatHeader {
  std::uint64_t n = 0;
  std::uint64_t half_width = 0;
  Topology topology = Topology::PeriodicZero;
  std::uint64_t seed = 0;
  std::uint64_t replicate = 0;
};

inline constexpr std::size_t kBandmatHeaderBytes = 52;

struct BandmatFile {
  BandmatHeader header;
  std::vector<std::complex<float>> bands;
};

/// Serialized bytes of m (payload narrowed to single precision).
std::string encode_bandmat(const BandMatrix& m);
BandmatFile decode_bandmat(const std::string& bytes);

/// Writes path and the JSON sidecar path + ".json" (spec echo), both atomically.
void write_bandmat(const BandMatrix& m, const std::string& path, const std::string& profile_json);
BandmatFile read_bandmat(const std::string& path);

}  // namespace bandclt
