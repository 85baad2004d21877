#include "bandclt/dump.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bandclt/errors.hpp"
#include "bandclt/experiment.hpp"

namespace bandclt {
namespace {

constexpr char kMagic[12] = {'b', 'a', 'n', 'd', 'm', 'a', 't', ' ', 'v', '1', '\0', '\0'};

template <class T>
void put_le(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

template <class T>
T get_le(const std::string& in, std::size_t& pos) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  pos += sizeof(T);
  return v;
}

}  // namespace

std::string encode_bandmat(const BandMatrix& m) {
  std::string out(kMagic, sizeof kMagic);
  put_le<std::uint64_t>(out, m.n());
  put_le<std::uint64_t>(out, m.half_width());
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.spec().topology()));
  put_le<std::uint32_t>(out, 0);
  put_le<std::uint64_t>(out, m.seed());
  put_le<std::uint64_t>(out, m.replicate());
  out.reserve(out.size() + m.bands().size() * 8);
  for (const cplx& v : m.bands()) {
    put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v.real())));
    put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v.imag())));
  }
  return out;
}

BandmatFile decode_bandmat(const std::string& bytes) {
  if (bytes.size() < kBandmatHeaderBytes || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
    throw Error("not a bandmat v1 file");
  std::size_t pos = sizeof kMagic;
  BandmatFile f;
  f.header.n = get_le<std::uint64_t>(bytes, pos);
  f.header.half_width = get_le<std::uint64_t>(bytes, pos);
  const auto topo = get_le<std::uint32_t>(bytes, pos);
  if (topo > static_cast<std::uint32_t>(Topology::NonPeriodicZero)) throw Error("bandmat: unknown topology code");
  f.header.topology = static_cast<Topology>(topo);
  (void)get_le<std::uint32_t>(bytes, pos);
  f.header.seed = get_le<std::uint64_t>(bytes, pos);
  f.header.replicate = get_le<std::uint64_t>(bytes, pos);
  const std::uint64_t width = 2 * f.header.half_width + 1;
  if (f.header.n == 0 || width > f.header.n || (bytes.size() - pos) / 8 != f.header.n * width ||
      (bytes.size() - pos) % 8 != 0)
    throw Error("bandmat: payload size does not match the header");
  f.bands.resize(f.header.n * width);
  for (auto& v : f.bands) {
    const float re = std::bit_cast<float>(get_le<std::uint32_t>(bytes, pos));
    const float im = std::bit_cast<float>(get_le<std::uint32_t>(bytes, pos));
    v = {re, im};
  }
  return f;
}

void write_bandmat(const BandMatrix& m, const std::string& path, const std::string& profile_json) {
  write_atomic(path, encode_bandmat(m));
  nlohmann::ordered_json side;
  side["format"] = "bandmat v1";
  side["n"] = m.n();
  side["half_width"] = m.half_width();
  side["width"] = m.width();
  side["topology"] = topology_name(m.spec().topology());
  side["nu"] = m.spec().nu();
  side["profile"] = nlohmann::ordered_json::parse(profile_json);
  side["seed"] = m.seed();
  side["replicate"] = m.replicate();
  side["entry_law"] = "complex-standard-gaussian";
  side["payload"] = "complex64 little-endian, row-major by offset -b..b";
  side["version"] = kVersionTag;
  write_atomic(path + ".json", side.dump(2) + "\n");
}

BandmatFile read_bandmat(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return decode_bandmat(ss.str());
}

}  // namespace bandclt
