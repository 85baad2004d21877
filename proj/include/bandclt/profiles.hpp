#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace bandclt {

enum class ProfileKind { Uniform, PiecewiseConstant, Tabulated };

/// A variance profile w: non-negative, supported on [-1/2, 1/2], integrating
/// to one and continuous at the origin. Immutable after construction.
///
/// Uniform and piecewise-constant profiles are stored as breakpoints plus the
/// constant value on each piece. Tabulated profiles are samples on a uniform
/// grid spanning [-1/2, 1/2] (both end points included) and are evaluated by
/// linear interpolation; every integral is taken of that interpolant.
class VarianceProfile {
 public:
  static VarianceProfile uniform();
  /// breaks: strictly increasing, from -1/2 to 1/2. values: one per piece.
  static VarianceProfile piecewise(std::vector<double> breaks, std::vector<double> values);
  /// samples at -1/2 + j/(samples.size()-1), j = 0..samples.size()-1.
  static VarianceProfile tabulated(std::vector<double> samples);

  ProfileKind kind() const noexcept { return kind_; }
  const std::vector<double>& breaks() const noexcept { return breaks_; }
  const std::vector<double>& values() const noexcept { return values_; }

  /// w(x); zero outside the support.
  double operator()(double x) const noexcept;

  double normalization() const noexcept { return normalization_; }
  /// omega = sup_x w(x)
  double sup() const noexcept { return sup_; }
  bool is_even() const noexcept { return even_; }

  /// Integral of w over [a, b] (clipped to the support).
  double integral(double a, double b) const noexcept;
  double square_integral() const noexcept;

  /// Fourier transform  int w(x) exp(2 pi i freq x) dx, exact for the stored
  /// representation. Real (imaginary part exactly zero) for even profiles.
  std::complex<double> transform(double freq) const noexcept;

  /// B such that |transform(t)| <= B / |t| for all t != 0 (total variation
  /// of w over 2 pi, counting the jumps at the support edges).
  double decay_constant() const noexcept { return decay_; }

  /// Masses of w on the cells [-1/2 + j/m, -1/2 + (j+1)/m), j = 0..m-1.
  std::vector<double> cell_masses(std::size_t cells_per_unit) const;

  /// Smallest power-of-two cell count per unit length for which w is
  /// constant on every cell, or 0 when no such resolution exists.
  std::size_t exact_resolution() const noexcept { return exact_resolution_; }

 private:
  VarianceProfile() = default;
  void finalize();

  ProfileKind kind_ = ProfileKind::Uniform;
  std::vector<double> breaks_;
  std::vector<double> values_;
  double normalization_ = 0.0;
  double sup_ = 0.0;
  double decay_ = 0.0;
  bool even_ = false;
  std::size_t exact_resolution_ = 0;
};

/// The 1/nu-periodized profile w_nu for nu in (0, 1], or the plain profile
/// w_0 when nu == 0. The two cases are separate code paths throughout.
class PeriodizedProfile {
 public:
  PeriodizedProfile(VarianceProfile base, double nu);

  const VarianceProfile& base() const noexcept { return base_; }
  double nu() const noexcept { return nu_; }
  bool periodic() const noexcept { return nu_ > 0.0; }

  double evaluate(double x) const noexcept;

  /// k-th Fourier coefficient of w_nu. Requires nu > 0.
  std::complex<double> fourier_coeff(long long k) const;

  /// Fourier transform of w_0 at t. Requires nu == 0.
  std::complex<double> fourier_transform(double t) const;

  /// l-fold self-convolution at 0 (circular with period 1/nu when nu > 0,
  /// linear when nu == 0) computed on a grid of grid_size cells across the
  /// fundamental domain (nu > 0) or across a padded interval whose width is
  /// the smallest power of two >= l (nu == 0). grid_size must be a power of
  /// two >= 256. Exact whenever the profile's breakpoints fall on the grid.
  double self_convolution_at_zero(int l, std::size_t grid_size) const;

 private:
  VarianceProfile base_;
  double nu_;
};

/// Values w_nu^{(l)}(0), l = 1..max_order, of the l-fold self-convolutions.
///
/// w is replaced by its cell masses on a grid with `cells_per_unit` cells per
/// unit length; the convolution of l piecewise-constant functions is then the
/// discrete convolution of the masses spread by a cardinal B-spline of order
/// l, which is evaluated with the stable Cox-de Boor recursion. The result is
/// exact (to rounding) when w is constant on every cell. For nu > 0 the
/// circular convolution is obtained by periodizing the linear one.
class ConvolutionPowers {
 public:
  ConvolutionPowers(const PeriodizedProfile& profile, std::size_t cells_per_unit, int max_order);

  int max_order() const noexcept { return static_cast<int>(at_zero_.size()); }
  std::size_t cells_per_unit() const noexcept { return cells_per_unit_; }
  /// true when the cell representation reproduces the profile exactly.
  bool exact() const noexcept { return exact_; }

  /// w^{(l)}(0), 1 <= l <= max_order().
  double at_zero(int l) const;

 private:
  std::size_t cells_per_unit_;
  bool exact_;
  std::vector<double> at_zero_;
};

/// Resolution used by the theory routines: the profile's exact resolution
/// when it has one, otherwise `fallback`.
std::size_t theory_resolution(const VarianceProfile& profile, std::size_t fallback = 64);

}  // namespace bandclt
