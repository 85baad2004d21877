#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace bandclt {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). A pure
/// function of (key, counter), so any entry of any replicate can be drawn
/// independently on any worker.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kW0;
        key[1] += kW1;
      }
      const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kM0 = 0xD2511F53u;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u;
  static constexpr std::uint32_t kW1 = 0xBB67AE85u;
};

enum class Stream : std::uint32_t { MatrixEntries = 0, PowerIteration = 1 };

/// Draws keyed by (seed, stream, replicate, index). Each index yields one
/// standard complex Gaussian (g1 + i g2)/sqrt(2).
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, Stream stream, std::uint32_t replicate) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        replicate_(replicate),
        stream_(static_cast<std::uint32_t>(stream)) {}

  /// Two independent uniforms in the open interval (0, 1), 53 bits each.
  std::array<double, 2> uniforms(std::uint64_t index) const noexcept {
    const auto out = Philox4x32::generate(
        {static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), replicate_, stream_},
        key_);
    const std::uint64_t a = (std::uint64_t{out[0]} << 32 | out[1]) >> 11;
    const std::uint64_t b = (std::uint64_t{out[2]} << 32 | out[3]) >> 11;
    constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
    return {(static_cast<double>(a) + 0.5) * scale, (static_cast<double>(b) + 0.5) * scale};
  }

  /// Box-Muller: modulus sqrt(-log u1), uniform phase 2 pi u2, so
  /// E|x|^2 = 1 and every pure moment E[x^k] vanishes.
  std::complex<double> complex_gaussian(std::uint64_t index) const noexcept {
    const auto [u1, u2] = uniforms(index);
    return std::polar(std::sqrt(-std::log(u1)), 2.0 * std::numbers::pi * u2);
  }

 private:
  Philox4x32::Key key_;
  std::uint32_t replicate_;
  std::uint32_t stream_;
};

}  // namespace bandclt
