#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "bandclt/les.hpp"
#include "bandclt/profiles.hpp"

namespace bandclt {

using Rational = boost::multiprecision::cpp_rational;

enum class VarianceMethod { FourierSeries, ConvolutionSeries, ContourQuadrature, ClosedForm };
const char* method_name(VarianceMethod m) noexcept;

/// A limiting (co)variance together with how it was obtained.
struct TheoryVariance {
  cplx value;
  VarianceMethod method;
  double trunc_error = 0.0;
  /// Series length K, integration cut-off T, or quadrature node count.
  double truncation = 0.0;
  /// For polynomial pairs, the coefficient-series value of the same quantity.
  std::optional<cplx> series_value;
};

enum class KernelMethod { Auto, FourierSeries, PowerSeries };

/// Inputs of the covariance kernel sigma(z, eta) and of the Fourier routes.
struct KernelParams {
  explicit KernelParams(PeriodizedProfile profile);

  PeriodizedProfile profile;
  long long series_truncation = 4096;  ///< K, >= 64 when nu > 0
  double integral_truncation = 200.0;  ///< T, >= 50 when nu = 0
  int nodes_per_unit = 32;             ///< Gauss-Legendre nodes per unit of t, >= 32 when nu = 0
  KernelMethod method = KernelMethod::Auto;
  /// Smallest |z conj(eta)| for which the power-series coefficients are
  /// precomputed to full accuracy; smaller moduli get a larger error bound.
  double min_modulus = 1.2;

  void validate() const;
};

struct KernelValue {
  cplx value;
  double trunc_error;
};

/// Limiting covariance kernel of centered resolvent traces,
///   sigma(z, eta) = nu sum_k w_k / (z conj(eta) - w_k)^2        (nu > 0)
///                 = sum_{l>=1} l w^{(l)}(0) (z conj(eta))^{-l-1}   (both cases)
/// where w_k are the Fourier coefficients of w_nu and w^{(l)} the l-fold
/// self-convolution. The Fourier route subtracts the first few power-series
/// terms analytically so the remaining k-series converges like k^{-5}.
class CovarianceKernel {
 public:
  explicit CovarianceKernel(KernelParams params);

  const KernelParams& params() const noexcept { return params_; }
  KernelMethod method() const noexcept { return method_; }

  /// sigma at z, eta; depends only on x = z * conj(eta). Requires |x| > 1.
  KernelValue operator()(cplx z, cplx eta) const { return at(z * std::conj(eta)); }
  KernelValue at(cplx x) const;
  KernelValue at(cplx x, KernelMethod method) const;

  /// w_nu^{(l)}(0) for 1 <= l <= max_order().
  double coefficient(int l) const { return powers_.at_zero(l); }
  int max_order() const noexcept { return powers_.max_order(); }

 private:
  KernelValue power_series(cplx x) const;
  KernelValue fourier_series(cplx x) const;

  KernelParams params_;
  KernelMethod method_;
  ConvolutionPowers powers_;
  double coefficient_error_ = 0.0;
  std::vector<cplx> fourier_;  // w_k for k = 0..K
};

/// Variance of the limit of sqrt(c/n) L^Delta_{z^l}:
///   l nu sum_k w_k^l  (nu > 0),   l int w_0hat(t)^l dt  (nu = 0),
/// both equal to l w^{(l)}(0). ClosedForm evaluates l w^{(l)}(0) exactly
/// (rational Irwin-Hall value for the uniform nu = 0 case);
/// ConvolutionSeries uses the grid convolution; FourierSeries sums or
/// integrates the Fourier data with a rigorous tail bound.
TheoryVariance monomial_variance(const PeriodizedProfile& profile, int l,
                                 VarianceMethod method = VarianceMethod::ClosedForm);
TheoryVariance monomial_variance(const VarianceProfile& profile, double nu, int l,
                                 VarianceMethod method = VarianceMethod::ClosedForm);
TheoryVariance monomial_variance(const KernelParams& params, int l, VarianceMethod method);

/// (1/pi) int sinc^l = p_l(0) = (1/(l-1)!) sum_{i<=l/2} (-1)^i C(l,i) (l/2-i)^{l-1}.
Rational sinc_power_integral_exact(int l);
double sinc_power_integral(int l);

/// l * sinc_power_integral_exact(l): limiting variance for w = 1, nu = 0.
Rational uniform_narrow_variance_exact(int l);

/// Density of the sum of m independent Uniform[-1/2, 1/2] variables.
double irwin_hall_pdf(int m, double x);

/// Number of permutations of 1..n with exactly m ascents. n <= 20.
std::uint64_t eulerian(int n, int m);

struct ContourOptions {
  double epsilon = 0.25;  ///< contours are circles of radius 1 + epsilon
  int nodes = 512;        ///< trapezoid nodes per contour
};

/// Sigma_ij = (1/4 pi^2) oint oint f_i(z) conj(f_j(eta)) sigma(z, eta) dz dconj(eta)
/// with both contours traversed so that Var(z^k) = k in the full i.i.d. case.
/// For polynomial pairs the coefficient series sum_l a_l conj(b_l) l w^{(l)}(0)
/// is returned alongside in `series_value`.
TheoryVariance limiting_covariance(const TestFunction& fi, const TestFunction& fj, const CovarianceKernel& kernel,
                                   const ContourOptions& options = {});
TheoryVariance limiting_covariance(const TestFunction& fi, const TestFunction& fj, const KernelParams& params,
                                   const ContourOptions& options = {});

/// Coefficient-series covariance of two polynomial test functions.
TheoryVariance polynomial_covariance(const TestFunction& fi, const TestFunction& fj,
                                     const PeriodizedProfile& profile);

/// Limiting pseudo-covariance Upsilon_ij, the unconjugated analogue of
/// limiting_covariance. Its kernel vanishes identically for entry laws whose
/// pure moments E[x^k] are all zero, which is the case for every supported law.
cplx pseudo_covariance(const TestFunction& fi, const TestFunction& fj, const KernelParams& params,
                       const ContourOptions& options = {});

}  // namespace bandclt
