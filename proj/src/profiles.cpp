#include "bandclt/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>

#include "bandclt/bspline.hpp"
#include "bandclt/errors.hpp"

namespace bandclt {
namespace {

constexpr double kNormTol = 1e-12;
constexpr double kPi = std::numbers::pi;

double sinc(double x) {
  if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

// int_0^a s sin(theta s) ds
double odd_moment(double theta, double a) {
  const double u = theta * a;
  if (std::abs(u) < 1e-4) return a * a * (u / 3.0 - u * u * u / 30.0);
  return a * a * (std::sin(u) - u * std::cos(u)) / (u * u);
}

bool is_power_of_two(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

}  // namespace

VarianceProfile VarianceProfile::uniform() {
  VarianceProfile p;
  p.kind_ = ProfileKind::Uniform;
  p.breaks_ = {-0.5, 0.5};
  p.values_ = {1.0};
  p.finalize();
  return p;
}

VarianceProfile VarianceProfile::piecewise(std::vector<double> breaks, std::vector<double> values) {
  if (breaks.size() < 2 || values.size() + 1 != breaks.size())
    throw ConfigError("piecewise profile needs k+1 breakpoints for k values");
  if (breaks.front() != -0.5 || breaks.back() != 0.5)
    throw ConfigError("piecewise profile breakpoints must span exactly [-0.5, 0.5]");
  for (std::size_t i = 1; i < breaks.size(); ++i)
    if (!(breaks[i] > breaks[i - 1]))
      throw ConfigError("piecewise profile breakpoints must be strictly increasing");
  for (double v : values)
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("profile values must be finite and >= 0");
  for (std::size_t i = 1; i + 1 < breaks.size(); ++i) {
    if (std::abs(breaks[i]) < 1e-15 && std::abs(values[i] - values[i - 1]) > kNormTol)
      throw ConfigError("profile must be continuous at 0");
  }
  VarianceProfile p;
  p.kind_ = ProfileKind::PiecewiseConstant;
  p.breaks_ = std::move(breaks);
  p.values_ = std::move(values);
  p.finalize();
  return p;
}

VarianceProfile VarianceProfile::tabulated(std::vector<double> samples) {
  if (samples.size() < 3) throw ConfigError("tabulated profile needs at least 3 samples");
  for (double v : samples)
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("profile values must be finite and >= 0");
  VarianceProfile p;
  p.kind_ = ProfileKind::Tabulated;
  const std::size_t segments = samples.size() - 1;
  p.breaks_.resize(samples.size());
  for (std::size_t j = 0; j <= segments; ++j)
    p.breaks_[j] = -0.5 + static_cast<double>(j) / static_cast<double>(segments);
  p.values_ = std::move(samples);
  p.finalize();
  return p;
}

void VarianceProfile::finalize() {
  normalization_ = integral(-0.5, 0.5);
  if (std::abs(normalization_ - 1.0) > kNormTol)
    throw ConfigError("profile must integrate to 1 over [-1/2, 1/2] (got " +
                      std::to_string(normalization_) + ")");
  sup_ = *std::max_element(values_.begin(), values_.end());

  // Total variation including the drops to zero outside the support.
  // Same formula for pieces and for the linear interpolant's sample deltas.
  double tv = values_.front() + values_.back();
  for (std::size_t j = 1; j < values_.size(); ++j) tv += std::abs(values_[j] - values_[j - 1]);
  decay_ = tv / (2.0 * kPi);

  even_ = true;
  const std::size_t nb = breaks_.size();
  for (std::size_t i = 0; i < nb && even_; ++i)
    even_ = std::abs(breaks_[i] + breaks_[nb - 1 - i]) < 1e-15;
  const std::size_t nv = values_.size();
  for (std::size_t i = 0; i < nv && even_; ++i)
    even_ = std::abs(values_[i] - values_[nv - 1 - i]) < 1e-15;

  exact_resolution_ = 0;
  if (kind_ != ProfileKind::Tabulated) {
    for (std::size_t m = 1; m <= (std::size_t{1} << 20); m *= 2) {
      const bool aligned = std::all_of(breaks_.begin(), breaks_.end(), [m](double b) {
        const double pos = (b + 0.5) * static_cast<double>(m);
        return std::abs(pos - std::round(pos)) < 1e-9;
      });
      if (aligned) {
        exact_resolution_ = m;
        break;
      }
    }
  }
}

double VarianceProfile::operator()(double x) const noexcept {
  if (!(x >= -0.5 && x <= 0.5)) return 0.0;
  if (kind_ == ProfileKind::Tabulated) {
    const double segments = static_cast<double>(values_.size() - 1);
    const double pos = (x + 0.5) * segments;
    auto j = static_cast<std::size_t>(std::floor(pos));
    if (j >= values_.size() - 1) return values_.back();
    const double frac = pos - static_cast<double>(j);
    return values_[j] + frac * (values_[j + 1] - values_[j]);
  }
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
  auto j = static_cast<std::size_t>(std::distance(breaks_.begin(), it));
  j = std::clamp<std::size_t>(j, 1, values_.size()) - 1;
  return values_[j];
}

double VarianceProfile::integral(double a, double b) const noexcept {
  a = std::max(a, -0.5);
  b = std::min(b, 0.5);
  if (!(b > a)) return 0.0;
  double total = 0.0;
  for (std::size_t j = 0; j + 1 < breaks_.size(); ++j) {
    const double lo = std::max(a, breaks_[j]);
    const double hi = std::min(b, breaks_[j + 1]);
    if (!(hi > lo)) continue;
    if (kind_ == ProfileKind::Tabulated) {
      const double h = breaks_[j + 1] - breaks_[j];
      const double y0 = values_[j], dy = (values_[j + 1] - values_[j]) / h;
      const double ylo = y0 + dy * (lo - breaks_[j]);
      const double yhi = y0 + dy * (hi - breaks_[j]);
      total += 0.5 * (hi - lo) * (ylo + yhi);
    } else {
      total += values_[j] * (hi - lo);
    }
  }
  return total;
}

double VarianceProfile::square_integral() const noexcept {
  double total = 0.0;
  for (std::size_t j = 0; j + 1 < breaks_.size(); ++j) {
    const double h = breaks_[j + 1] - breaks_[j];
    if (kind_ == ProfileKind::Tabulated) {
      const double y0 = values_[j], y1 = values_[j + 1];
      total += h * (y0 * y0 + y0 * y1 + y1 * y1) / 3.0;
    } else {
      total += h * values_[j] * values_[j];
    }
  }
  return total;
}

std::complex<double> VarianceProfile::transform(double freq) const noexcept {
  const double theta = 2.0 * kPi * freq;
  std::complex<double> total{0.0, 0.0};
  for (std::size_t j = 0; j + 1 < breaks_.size(); ++j) {
    const double h = breaks_[j + 1] - breaks_[j];
    const double mid = 0.5 * (breaks_[j] + breaks_[j + 1]);
    const std::complex<double> phase = std::polar(1.0, theta * mid);
    if (kind_ == ProfileKind::Tabulated) {
      const double mean = 0.5 * (values_[j] + values_[j + 1]);
      const double slope = (values_[j + 1] - values_[j]) / h;
      const std::complex<double> piece{mean * h * sinc(0.5 * theta * h),
                                       2.0 * slope * odd_moment(theta, 0.5 * h)};
      total += phase * piece;
    } else {
      total += phase * (values_[j] * h * sinc(0.5 * theta * h));
    }
  }
  if (even_) total.imag(0.0);
  return total;
}

std::vector<double> VarianceProfile::cell_masses(std::size_t cells_per_unit) const {
  if (cells_per_unit == 0) throw DomainError("cell count must be positive");
  const double h = 1.0 / static_cast<double>(cells_per_unit);
  std::vector<double> masses(cells_per_unit);
  for (std::size_t j = 0; j < cells_per_unit; ++j) {
    const double a = -0.5 + static_cast<double>(j) * h;
    masses[j] = integral(a, a + h);
  }
  return masses;
}

PeriodizedProfile::PeriodizedProfile(VarianceProfile base, double nu) : base_(std::move(base)), nu_(nu) {
  if (!(nu >= 0.0 && nu <= 1.0)) throw ConfigError("nu must lie in [0, 1]");
}

double PeriodizedProfile::evaluate(double x) const noexcept {
  if (!periodic()) return base_(x);
  const double period = 1.0 / nu_;
  const double reduced = x - period * std::floor(x / period + 0.5);
  return base_(reduced);
}

std::complex<double> PeriodizedProfile::fourier_coeff(long long k) const {
  if (!periodic()) throw DomainError("fourier_coeff needs nu > 0; use fourier_transform for nu = 0");
  return base_.transform(static_cast<double>(k) * nu_);
}

std::complex<double> PeriodizedProfile::fourier_transform(double t) const {
  if (periodic()) throw DomainError("fourier_transform needs nu = 0; use fourier_coeff for nu > 0");
  return base_.transform(t);
}

double PeriodizedProfile::self_convolution_at_zero(int l, std::size_t grid_size) const {
  if (l < 1) throw DomainError("convolution order must be >= 1");
  if (grid_size < 256 || !is_power_of_two(grid_size))
    throw DomainError("grid_size must be a power of two >= 256");
  double per_unit = 0.0;
  if (periodic()) {
    per_unit = static_cast<double>(grid_size) * nu_;
  } else {
    std::size_t width = 1;
    while (width < static_cast<std::size_t>(l)) width *= 2;
    per_unit = static_cast<double>(grid_size) / static_cast<double>(width);
  }
  std::size_t cells = 1;
  while (static_cast<double>(cells * 2) <= per_unit) cells *= 2;
  if (per_unit < 2.0)
    throw DomainError("grid of " + std::to_string(grid_size) +
                      " cells is too coarse to resolve the profile support");
  return ConvolutionPowers(*this, cells, l).at_zero(l);
}

ConvolutionPowers::ConvolutionPowers(const PeriodizedProfile& profile, std::size_t cells_per_unit,
                                     int max_order)
    : cells_per_unit_(cells_per_unit) {
  if (max_order < 1) throw DomainError("max_order must be >= 1");
  const auto& base = profile.base();
  const std::size_t exact_m = base.exact_resolution();
  exact_ = exact_m != 0 && cells_per_unit % exact_m == 0;

  const std::vector<double> masses = base.cell_masses(cells_per_unit);
  const double m = static_cast<double>(cells_per_unit);
  std::vector<double> conv = masses;
  std::vector<double> next;
  at_zero_.resize(static_cast<std::size_t>(max_order));

  for (int l = 1; l <= max_order; ++l) {
    if (l > 1) {
      next.assign(conv.size() + masses.size() - 1, 0.0);
      for (std::size_t a = 0; a < conv.size(); ++a) {
        const double ca = conv[a];
        if (ca == 0.0) continue;
        for (std::size_t b = 0; b < masses.size(); ++b) next[a + b] += ca * masses[b];
      }
      conv.swap(next);
    }

    // B-spline weights only depend on the fractional grid position.
    std::map<long long, std::vector<double>> spline_cache;
    auto value_at = [&](double x) {
      const double t = (x + 0.5 * l) * m;
      if (t < 0.0 || t > l * m) return 0.0;
      const double t0 = std::floor(t);
      const double frac = t - t0;
      const auto key = static_cast<long long>(std::llround(frac * 1099511627776.0));
      auto it = spline_cache.find(key);
      if (it == spline_cache.end()) it = spline_cache.emplace(key, cardinal_bspline_values(l, frac)).first;
      const auto& spline = it->second;
      const auto base_index = static_cast<long long>(t0);
      double s = 0.0;
      for (int i = 0; i < l; ++i) {
        const long long j = base_index - i;
        if (j < 0 || j >= static_cast<long long>(conv.size())) continue;
        s += conv[static_cast<std::size_t>(j)] * spline[static_cast<std::size_t>(i)];
      }
      return s * m;
    };

    double total = 0.0;
    if (!profile.periodic()) {
      total = value_at(0.0);
    } else {
      const double period = 1.0 / profile.nu();
      const auto reach = static_cast<long long>(std::floor(0.5 * l / period));
      for (long long k = -reach; k <= reach; ++k) total += value_at(static_cast<double>(k) * period);
    }
    at_zero_[static_cast<std::size_t>(l - 1)] = total;
  }
}

double ConvolutionPowers::at_zero(int l) const {
  if (l < 1 || l > max_order()) throw DomainError("convolution order out of the precomputed range");
  return at_zero_[static_cast<std::size_t>(l - 1)];
}

std::size_t theory_resolution(const VarianceProfile& profile, std::size_t fallback) {
  const std::size_t exact = profile.exact_resolution();
  return exact != 0 ? exact : fallback;
}

}  // namespace bandclt
