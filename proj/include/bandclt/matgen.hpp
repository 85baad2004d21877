#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bandclt/profiles.hpp"

namespace bandclt {

using cplx = std::complex<double>;

inline constexpr std::size_t kDefaultDenseLimit = 4096;

enum class Topology {
  PeriodicNu,       ///< band wraps around the corners, profile periodized with nu > 0
  PeriodicZero,     ///< band wraps around the corners, nu = 0 (three-term wrap rule)
  NonPeriodicZero,  ///< band truncated at the matrix edges, nu = 0
};

const char* topology_name(Topology t) noexcept;
Topology parse_topology(const std::string& name);

/// Geometry of a band ensemble: dimension n, half-bandwidth b (so the band
/// holds c = 2b + 1 diagonals), topology and variance profile.
class BandSpec {
 public:
  BandSpec(std::size_t n, std::size_t half_width, Topology topology, PeriodizedProfile profile);

  std::size_t n() const noexcept { return n_; }
  std::size_t half_width() const noexcept { return b_; }
  std::size_t width() const noexcept { return 2 * b_ + 1; }
  Topology topology() const noexcept { return topology_; }
  bool periodic() const noexcept { return topology_ != Topology::NonPeriodicZero; }
  const PeriodizedProfile& profile() const noexcept { return profile_; }
  double nu() const noexcept { return profile_.nu(); }

 private:
  std::size_t n_;
  std::size_t b_;
  Topology topology_;
  PeriodizedProfile profile_;
};

enum class EntryLaw { ComplexStandardGaussian };

/// A sampled band matrix. Row i stores the c entries m(i, i+d) for offsets
/// d = -b..b at bands[i*c + d + b], with columns taken mod n for periodic
/// topologies. For the non-periodic topology, slots whose column falls off
/// the matrix are structurally absent and hold zero.
class BandMatrix {
 public:
  BandMatrix(BandSpec spec, std::vector<cplx> bands, std::uint64_t seed = 0, std::size_t replicate = 0);

  const BandSpec& spec() const noexcept { return spec_; }
  std::size_t n() const noexcept { return spec_.n(); }
  std::size_t half_width() const noexcept { return spec_.half_width(); }
  std::size_t width() const noexcept { return spec_.width(); }
  bool periodic() const noexcept { return spec_.periodic(); }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t replicate() const noexcept { return replicate_; }

  std::span<const cplx> bands() const noexcept { return bands_; }
  std::span<const cplx> row(std::size_t i) const noexcept {
    return std::span<const cplx>(bands_).subspan(i * width(), width());
  }

  /// Column index of slot (i, d), or -1 when absent.
  long long column(std::size_t i, long long offset) const noexcept;
  bool stored(std::size_t i, long long offset) const noexcept { return column(i, offset) >= 0; }

  /// m(i, j); zero when (i, j) is outside the band.
  cplx operator()(std::size_t i, std::size_t j) const noexcept;

  /// y = M x and y = M^* x in band storage.
  void multiply(std::span<const cplx> x, std::span<cplx> y) const;
  void multiply_adjoint(std::span<const cplx> x, std::span<cplx> y) const;

 private:
  BandSpec spec_;
  std::vector<cplx> bands_;
  std::uint64_t seed_;
  std::size_t replicate_;
};

/// m(i,j) = c^{-1/2} x(i,j) sqrt(w((i-j)/c)) with the topology's wrap rule.
/// (seed, replicate) fully determine the matrix: entry (i, j) is drawn from a
/// counter-based stream at flat index i*n + j.
BandMatrix sample(const BandSpec& spec, EntryLaw law, std::uint64_t seed, std::size_t replicate);

/// Row indices (0-based, ascending) whose entry in column j lies in the band.
std::vector<std::size_t> band_index_set(const BandSpec& spec, std::size_t j);

Eigen::MatrixXcd to_dense(const BandMatrix& m, std::size_t dense_limit = kDefaultDenseLimit);

}  // namespace bandclt
