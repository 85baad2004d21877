#include "bandclt/matgen.hpp"

#include <cmath>
#include <string>

#include "bandclt/errors.hpp"
#include "bandclt/rng.hpp"

namespace bandclt {

const char* topology_name(Topology t) noexcept {
  switch (t) {
    case Topology::PeriodicNu: return "periodic-nu";
    case Topology::PeriodicZero: return "periodic-zero";
    case Topology::NonPeriodicZero: return "nonperiodic-zero";
  }
  return "?";
}

Topology parse_topology(const std::string& name) {
  if (name == "periodic-nu") return Topology::PeriodicNu;
  if (name == "periodic-zero") return Topology::PeriodicZero;
  if (name == "nonperiodic-zero") return Topology::NonPeriodicZero;
  throw ConfigError("unknown topology '" + name + "'");
}

BandSpec::BandSpec(std::size_t n, std::size_t half_width, Topology topology, PeriodizedProfile profile)
    : n_(n), b_(half_width), topology_(topology), profile_(std::move(profile)) {
  if (n_ < 4) throw ConfigError("matrix dimension must be >= 4");
  if (width() > n_) throw ConfigError("band width 2b+1 exceeds the dimension");
  if (topology_ == Topology::PeriodicNu && !profile_.periodic())
    throw ConfigError("periodic-nu topology needs a profile with nu > 0");
  if (topology_ != Topology::PeriodicNu && profile_.periodic())
    throw ConfigError(std::string(topology_name(topology_)) +
                      " topology needs nu = 0 (no variance formula for non-periodic bands with nu > 0)");
}

BandMatrix::BandMatrix(BandSpec spec, std::vector<cplx> bands, std::uint64_t seed, std::size_t replicate)
    : spec_(std::move(spec)), bands_(std::move(bands)), seed_(seed), replicate_(replicate) {
  if (bands_.size() != spec_.n() * spec_.width()) throw ConfigError("band payload has the wrong size");
}

long long BandMatrix::column(std::size_t i, long long offset) const noexcept {
  const auto n = static_cast<long long>(this->n());
  long long j = static_cast<long long>(i) + offset;
  if (periodic()) {
    j %= n;
    if (j < 0) j += n;
    return j;
  }
  return (j < 0 || j >= n) ? -1 : j;
}

cplx BandMatrix::operator()(std::size_t i, std::size_t j) const noexcept {
  const auto n = static_cast<long long>(this->n());
  const auto b = static_cast<long long>(half_width());
  long long d = static_cast<long long>(j) - static_cast<long long>(i);
  if (periodic()) {
    if (d > b) d -= n;
    if (d < -b) d += n;
  }
  if (d < -b || d > b) return {};
  return bands_[i * width() + static_cast<std::size_t>(d + b)];
}

void BandMatrix::multiply(std::span<const cplx> x, std::span<cplx> y) const {
  const std::size_t n = this->n(), c = width();
  const auto b = static_cast<long long>(half_width());
  for (std::size_t i = 0; i < n; ++i) {
    const cplx* r = &bands_[i * c];
    cplx acc{};
    for (long long d = -b; d <= b; ++d) {
      const long long j = column(i, d);
      if (j >= 0) acc += r[d + b] * x[static_cast<std::size_t>(j)];
    }
    y[i] = acc;
  }
}

void BandMatrix::multiply_adjoint(std::span<const cplx> x, std::span<cplx> y) const {
  const std::size_t n = this->n(), c = width();
  const auto b = static_cast<long long>(half_width());
  std::fill(y.begin(), y.end(), cplx{});
  for (std::size_t i = 0; i < n; ++i) {
    const cplx* r = &bands_[i * c];
    const cplx xi = x[i];
    for (long long d = -b; d <= b; ++d) {
      const long long j = column(i, d);
      if (j >= 0) y[static_cast<std::size_t>(j)] += std::conj(r[d + b]) * xi;
    }
  }
}

BandMatrix sample(const BandSpec& spec, EntryLaw law, std::uint64_t seed, std::size_t replicate) {
  if (law != EntryLaw::ComplexStandardGaussian) throw ConfigError("unsupported entry law");
  if (replicate > 0xffffffffu) throw ConfigError("replicate index must fit in 32 bits");
  const std::size_t n = spec.n(), c = spec.width();
  const auto b = static_cast<long long>(spec.half_width());
  const auto nn = static_cast<long long>(n);
  const double cn = static_cast<double>(c);
  const auto& profile = spec.profile();

  // Standard deviation factor as a function of the raw difference i - j.
  auto scale = [&](long long diff) {
    switch (spec.topology()) {
      case Topology::PeriodicNu:
      case Topology::NonPeriodicZero:
        return std::sqrt(profile.evaluate(static_cast<double>(diff) / cn));
      case Topology::PeriodicZero:
        return std::sqrt(profile.evaluate(static_cast<double>(diff) / cn)) +
               std::sqrt(profile.evaluate(static_cast<double>(diff + nn) / cn)) +
               std::sqrt(profile.evaluate(static_cast<double>(diff - nn) / cn));
    }
    return 0.0;
  };
  // For offset d the raw difference is -d, or -d -+ n when the slot wraps.
  // Periodic-nu slots use the circular offset so every row sees the same
  // profile even when c/n differs slightly from the declared nu.
  const bool circular = spec.topology() == Topology::PeriodicNu;
  std::vector<double> direct(c), wrapped_low(c), wrapped_high(c);
  for (long long d = -b; d <= b; ++d) {
    const auto k = static_cast<std::size_t>(d + b);
    direct[k] = scale(-d) / std::sqrt(cn);
    wrapped_high[k] = circular ? direct[k] : scale(-d + nn) / std::sqrt(cn);  // j = i + d - n
    wrapped_low[k] = circular ? direct[k] : scale(-d - nn) / std::sqrt(cn);   // j = i + d + n
  }

  const CounterRng rng(seed, Stream::MatrixEntries, static_cast<std::uint32_t>(replicate));
  std::vector<cplx> bands(n * c);
  for (std::size_t i = 0; i < n; ++i) {
    for (long long d = -b; d <= b; ++d) {
      const auto k = static_cast<std::size_t>(d + b);
      const long long raw = static_cast<long long>(i) + d;
      double s = direct[k];
      long long j = raw;
      if (raw >= nn || raw < 0) {
        if (!spec.periodic()) continue;
        if (raw >= nn) {
          j = raw - nn;
          s = wrapped_high[k];
        } else {
          j = raw + nn;
          s = wrapped_low[k];
        }
      }
      if (s == 0.0) continue;
      const auto flat = static_cast<std::uint64_t>(i) * n + static_cast<std::uint64_t>(j);
      bands[i * c + k] = rng.complex_gaussian(flat) * s;
    }
  }
  return BandMatrix(spec, std::move(bands), seed, replicate);
}

std::vector<std::size_t> band_index_set(const BandSpec& spec, std::size_t j) {
  const std::size_t n = spec.n(), b = spec.half_width();
  if (j >= n) throw DomainError("column index out of range");
  std::vector<std::size_t> rows;
  rows.reserve(spec.width());
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t gap = i > j ? i - j : j - i;
    const std::size_t dist = spec.periodic() ? std::min(gap, n - gap) : gap;
    if (dist <= b) rows.push_back(i);
  }
  return rows;
}

Eigen::MatrixXcd to_dense(const BandMatrix& m, std::size_t dense_limit) {
  const std::size_t n = m.n();
  if (n > dense_limit)
    throw ConfigError("dimension " + std::to_string(n) + " exceeds dense_limit " + std::to_string(dense_limit));
  Eigen::MatrixXcd dense = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const auto b = static_cast<long long>(m.half_width());
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = m.row(i);
    for (long long d = -b; d <= b; ++d) {
      const long long j = m.column(i, d);
      if (j >= 0) dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r[static_cast<std::size_t>(d + b)];
    }
  }
  return dense;
}

}  // namespace bandclt
