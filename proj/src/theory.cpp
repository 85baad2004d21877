#include "bandclt/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/special_functions/legendre.hpp>

#include "bandclt/bspline.hpp"
#include "bandclt/errors.hpp"

namespace bandclt {
namespace {

using boost::multiprecision::cpp_int;

constexpr double kPi = std::numbers::pi;
constexpr int kSubtractedTerms = 4;
constexpr double kTailTarget = 1e-12;
constexpr long long kMaxSeriesTerms = 1LL << 20;
constexpr double kMaxIntegralCutoff = 131072.0;

// sum_{l > L} l q^{l+1}
double power_tail(int order, double q) {
  const double L = order;
  return q * q * ((L + 1.0) * std::pow(q, L) * (1.0 - q) + std::pow(q, L + 1.0)) / ((1.0 - q) * (1.0 - q));
}

int kernel_order(double min_modulus, double omega) {
  const double q = 1.0 / min_modulus;
  int order = 8;
  while (order < 1000 && omega * power_tail(order, q) > 1e-16) order += 8;
  return order;
}

cpp_int binomial(int n, int k) {
  cpp_int r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

cpp_int factorial(int n) {
  cpp_int r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

struct GaussLegendre {
  explicit GaussLegendre(int n) {
    // legendre_p_zeros returns the non-negative roots in increasing order.
    const auto roots = boost::math::legendre_p_zeros<double>(n);
    for (double x : roots) {
      const double dp = boost::math::legendre_p_prime(n, x);
      const double w = 2.0 / ((1.0 - x * x) * dp * dp);
      if (x == 0.0) {
        nodes.push_back(0.0);
        weights.push_back(w);
      } else {
        nodes.push_back(x);
        weights.push_back(w);
        nodes.push_back(-x);
        weights.push_back(w);
      }
    }
  }
  std::vector<double> nodes, weights;
};

void check_order(int l) {
  if (l < 1) throw DomainError("monomial power must be >= 1");
}

TheoryVariance closed_form_variance(const PeriodizedProfile& p, int l) {
  const auto& base = p.base();
  if (base.kind() == ProfileKind::Uniform && !p.periodic() && l <= 60) {
    const double v = static_cast<double>(uniform_narrow_variance_exact(l));
    return {v, VarianceMethod::ClosedForm, 4e-16 * v, 0.0, std::nullopt};
  }
  if (base.exact_resolution() != 0) {
    const double v = l * ConvolutionPowers(p, base.exact_resolution(), l).at_zero(l);
    return {v, VarianceMethod::ClosedForm, 1e-14 * l * std::max(1.0, v), 0.0, std::nullopt};
  }
  const std::size_t fine = theory_resolution(base);
  const double v = l * ConvolutionPowers(p, fine, l).at_zero(l);
  const double coarse = l * ConvolutionPowers(p, fine / 2, l).at_zero(l);
  return {v, VarianceMethod::ConvolutionSeries, std::abs(v - coarse), static_cast<double>(fine), std::nullopt};
}

TheoryVariance convolution_variance(const PeriodizedProfile& p, int l) {
  constexpr std::size_t grid = 1024;
  const double v = l * p.self_convolution_at_zero(l, grid);
  const double coarse = l * p.self_convolution_at_zero(l, grid / 2);
  return {v, VarianceMethod::ConvolutionSeries, std::abs(v - coarse) + 1e-14 * l * std::max(1.0, v),
          static_cast<double>(grid), std::nullopt};
}

TheoryVariance fourier_variance(const KernelParams& params, int l) {
  const auto& p = params.profile;
  const auto& base = p.base();
  const double B = base.decay_constant();

  if (p.periodic()) {
    const double nu = p.nu();
    if (l == 1) {
      // Fejer means of nu sum_k w_k converge to w_nu(0) at a continuity point.
      auto fejer = [&](long long K) {
        double s = base.transform(0.0).real();
        for (long long k = 1; k <= K; ++k)
          s += 2.0 * (1.0 - static_cast<double>(k) / static_cast<double>(K + 1)) * p.fourier_coeff(k).real();
        return nu * s;
      };
      const long long K = 1LL << 18;
      const double v = fejer(K);
      return {v, VarianceMethod::FourierSeries, std::abs(v - fejer(K / 2)), static_cast<double>(K), std::nullopt};
    }
    // nu [w_0^l + 2 sum_{k>=1} Re w_k^l], extended until the tail bound
    // 2 nu (B/nu)^l K^{1-l}/(l-1) falls below target.
    double sum = std::pow(base.transform(0.0).real(), l);
    long long done = 0;
    long long K = std::max<long long>(params.series_truncation, 64);
    double tail = 0.0;
    for (;;) {
      for (long long k = done + 1; k <= K; ++k) sum += 2.0 * std::pow(p.fourier_coeff(k), l).real();
      done = K;
      tail = 2.0 * nu * std::pow(B / nu, l) * std::pow(static_cast<double>(K), 1.0 - l) / (l - 1);
      if (tail < kTailTarget || K >= kMaxSeriesTerms) break;
      K *= 2;
    }
    return {l * nu * sum, VarianceMethod::FourierSeries, l * tail, static_cast<double>(K), std::nullopt};
  }

  // The t-integral of w_0hat alone converges only conditionally.
  if (l == 1) return convolution_variance(p, 1);

  const GaussLegendre gl(params.nodes_per_unit);
  double integral = 0.0;
  double done = 0.0;
  double T = std::max(params.integral_truncation, 50.0);
  double tail = 0.0;
  for (;;) {
    for (double a = done; a < T; a += 1.0) {
      for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
        const double t = a + 0.5 * (gl.nodes[q] + 1.0);
        integral += 0.5 * gl.weights[q] * std::pow(p.fourier_transform(t), l).real();
      }
    }
    done = T;
    tail = 2.0 * std::pow(B, l) * std::pow(T, 1.0 - l) / (l - 1);
    if (tail < kTailTarget || T >= kMaxIntegralCutoff) break;
    T *= 2.0;
  }
  return {2.0 * l * integral, VarianceMethod::FourierSeries, l * tail, T, std::nullopt};
}

void check_contour(const TestFunction& fi, const TestFunction& fj, const ContourOptions& options) {
  if (!(options.epsilon > 0.0)) throw DomainError("contour radius must exceed 1");
  if (options.nodes < 8 || options.nodes % 2 != 0) throw DomainError("contour node count must be even and >= 8");
  const double r = 1.0 + options.epsilon;
  if (!(fi.radius() > r) || !(fj.radius() > r))
    throw DomainError("test function is not analytic on the integration contour");
}

// (1/N^2) sum_{a,b} F_a conj(G_b) K_{(a-b) mod N}, with F_a = f_i(z_a) z_a on
// z_a = r exp(2 pi i a/N). This is the trapezoid rule for
// (1/4pi^2) oint oint f_i conj(f_j) sigma dz dconj(eta).
cplx contour_sum(const TestFunction& fi, const TestFunction& fj, double r, int N,
                 const std::vector<cplx>& kernel_by_difference, bool conjugate_second) {
  std::vector<cplx> F(static_cast<std::size_t>(N)), G(static_cast<std::size_t>(N));
  for (int a = 0; a < N; ++a) {
    const cplx z = std::polar(r, 2.0 * kPi * a / N);
    F[static_cast<std::size_t>(a)] = fi(z) * z;
    const cplx g = fj(z) * z;
    G[static_cast<std::size_t>(a)] = conjugate_second ? std::conj(g) : g;
  }
  cplx total{};
  for (int a = 0; a < N; ++a) {
    cplx row{};
    for (int b = 0; b < N; ++b) {
      const int d = ((a - b) % N + N) % N;
      row += G[static_cast<std::size_t>(b)] * kernel_by_difference[static_cast<std::size_t>(d)];
    }
    total += F[static_cast<std::size_t>(a)] * row;
  }
  return total / (static_cast<double>(N) * N);
}

}  // namespace

const char* method_name(VarianceMethod m) noexcept {
  switch (m) {
    case VarianceMethod::FourierSeries: return "FourierSeries";
    case VarianceMethod::ConvolutionSeries: return "ConvolutionSeries";
    case VarianceMethod::ContourQuadrature: return "ContourQuadrature";
    case VarianceMethod::ClosedForm: return "ClosedForm";
  }
  return "?";
}

KernelParams::KernelParams(PeriodizedProfile p) : profile(std::move(p)) {}

void KernelParams::validate() const {
  if (profile.periodic() && series_truncation < 64) throw ConfigError("series truncation K must be >= 64");
  if (!profile.periodic() && integral_truncation < 50.0) throw ConfigError("integral truncation T must be >= 50");
  if (!profile.periodic() && nodes_per_unit < 32) throw ConfigError("quadrature needs >= 32 nodes per unit");
  if (nodes_per_unit < 1) throw ConfigError("quadrature needs at least one node per unit");
  if (!(min_modulus > 1.0)) throw ConfigError("min_modulus must exceed 1");
  if (method == KernelMethod::FourierSeries && !profile.periodic())
    throw ConfigError("the nu = 0 kernel is evaluated through its power series");
}

CovarianceKernel::CovarianceKernel(KernelParams params)
    : params_((params.validate(), std::move(params))),
      method_(params_.method != KernelMethod::Auto
                  ? params_.method
                  : (params_.profile.periodic() ? KernelMethod::FourierSeries : KernelMethod::PowerSeries)),
      powers_(params_.profile, theory_resolution(params_.profile.base()),
              kernel_order(params_.min_modulus, params_.profile.base().sup())) {
  if (!powers_.exact()) {
    const int check = std::min(powers_.max_order(), 32);
    const ConvolutionPowers coarse(params_.profile, powers_.cells_per_unit() / 2, check);
    for (int l = 1; l <= check; ++l)
      coefficient_error_ = std::max(coefficient_error_, std::abs(coarse.at_zero(l) - powers_.at_zero(l)));
  }
  if (params_.profile.periodic()) {
    fourier_.resize(static_cast<std::size_t>(params_.series_truncation) + 1);
    for (long long k = 0; k <= params_.series_truncation; ++k)
      fourier_[static_cast<std::size_t>(k)] = params_.profile.fourier_coeff(k);
  }
}

KernelValue CovarianceKernel::at(cplx x) const { return at(x, method_); }

KernelValue CovarianceKernel::at(cplx x, KernelMethod method) const {
  if (!(std::abs(x) > 1.0 + 1e-9)) throw DomainError("kernel needs |z conj(eta)| > 1");
  if (method == KernelMethod::Auto) method = method_;
  if (method == KernelMethod::FourierSeries) {
    if (!params_.profile.periodic()) throw DomainError("Fourier-series kernel needs nu > 0");
    return fourier_series(x);
  }
  return power_series(x);
}

KernelValue CovarianceKernel::power_series(cplx x) const {
  const cplx inv = 1.0 / x;
  cplx p = inv * inv;
  cplx sum{};
  for (int l = 1; l <= powers_.max_order(); ++l) {
    sum += static_cast<double>(l) * powers_.at_zero(l) * p;
    p *= inv;
  }
  const double q = 1.0 / std::abs(x);
  const double err = params_.profile.base().sup() * power_tail(powers_.max_order(), q) +
                     coefficient_error_ * q * q / ((1.0 - q) * (1.0 - q));
  return {sum, err};
}

KernelValue CovarianceKernel::fourier_series(cplx x) const {
  constexpr int S = kSubtractedTerms;
  const double nu = params_.profile.nu();
  const cplx inv = 1.0 / x;
  cplx head{};
  cplx p = inv * inv;
  for (int l = 1; l <= S; ++l) {
    head += static_cast<double>(l) * powers_.at_zero(l) * p;
    p *= inv;
  }
  // nu w/(x-w)^2 minus its first S power-series terms in w/x.
  auto remainder = [&](cplx w) {
    const cplx u = w * inv;
    const cplx one_minus = 1.0 - u;
    return w * std::pow(u, S) * (static_cast<double>(S + 1) - static_cast<double>(S) * u) /
           (one_minus * one_minus) * inv * inv;
  };
  cplx series = remainder(fourier_[0]);
  for (std::size_t k = 1; k < fourier_.size(); ++k)
    series += remainder(fourier_[k]) + remainder(std::conj(fourier_[k]));

  const double q = 1.0 / std::abs(x);
  const double B = params_.profile.base().decay_constant();
  const auto K = static_cast<double>(params_.series_truncation);
  const double tail = nu * (static_cast<double>(S + 1) + S * q) / ((1.0 - q) * (1.0 - q)) * std::pow(q, S + 2) * 2.0 *
                      std::pow(B / nu, S + 1) * std::pow(K, -S) / S;
  const double err = tail + coefficient_error_ * q * q / ((1.0 - q) * (1.0 - q));
  return {head + nu * series, err};
}

TheoryVariance monomial_variance(const KernelParams& params, int l, VarianceMethod method) {
  check_order(l);
  params.validate();
  switch (method) {
    case VarianceMethod::ClosedForm: return closed_form_variance(params.profile, l);
    case VarianceMethod::ConvolutionSeries: return convolution_variance(params.profile, l);
    case VarianceMethod::FourierSeries: return fourier_variance(params, l);
    case VarianceMethod::ContourQuadrature: {
      const auto f = TestFunction::monomial(l);
      return limiting_covariance(f, f, params);
    }
  }
  throw DomainError("unknown variance method");
}

TheoryVariance monomial_variance(const PeriodizedProfile& profile, int l, VarianceMethod method) {
  return monomial_variance(KernelParams(profile), l, method);
}

TheoryVariance monomial_variance(const VarianceProfile& profile, double nu, int l, VarianceMethod method) {
  return monomial_variance(PeriodizedProfile(profile, nu), l, method);
}

Rational sinc_power_integral_exact(int l) {
  if (l < 1) throw DomainError("sinc power must be >= 1");
  cpp_int num = 0;
  for (int i = 0; i <= l / 2; ++i) {
    cpp_int term = binomial(l, i) * boost::multiprecision::pow(cpp_int(l - 2 * i), static_cast<unsigned>(l - 1));
    num += (i % 2 == 0) ? term : cpp_int(-term);
  }
  const cpp_int den = (cpp_int(1) << (l - 1)) * factorial(l - 1);
  return Rational(num, den);
}

double sinc_power_integral(int l) { return static_cast<double>(sinc_power_integral_exact(l)); }

Rational uniform_narrow_variance_exact(int l) { return Rational(l) * sinc_power_integral_exact(l); }

double irwin_hall_pdf(int m, double x) {
  if (m < 1) throw DomainError("Irwin-Hall order must be >= 1");
  const double half = 0.5 * m;
  if (x < -half || x > half) return 0.0;
  const double y = x + half;
  if (m > 20) return cardinal_bspline(m, y);
  long double sum = 0.0L;
  long double binom = 1.0L;
  const int top = static_cast<int>(std::floor(y));
  for (int i = 0; i <= std::min(top, m); ++i) {
    if (i > 0) binom = binom * (m - i + 1) / i;
    const long double term = binom * std::pow(static_cast<long double>(y) - i, m - 1);
    sum += (i % 2 == 0) ? term : -term;
  }
  long double fact = 1.0L;
  for (int i = 2; i < m; ++i) fact *= i;
  return static_cast<double>(std::max(sum / fact, 0.0L));
}

std::uint64_t eulerian(int n, int m) {
  if (n < 1) throw DomainError("Eulerian numbers need n >= 1");
  if (n > 20) throw DomainError("Eulerian numbers beyond n = 20 overflow 64 bits");
  if (m < 0 || m >= n) return 0;
  std::vector<std::uint64_t> row{1};  // A(1, 0)
  for (int k = 2; k <= n; ++k) {
    std::vector<std::uint64_t> next(static_cast<std::size_t>(k), 0);
    for (int j = 0; j < k; ++j) {
      std::uint64_t v = 0;
      if (j < k - 1) v += static_cast<std::uint64_t>(j + 1) * row[static_cast<std::size_t>(j)];
      if (j > 0) v += static_cast<std::uint64_t>(k - j) * row[static_cast<std::size_t>(j - 1)];
      next[static_cast<std::size_t>(j)] = v;
    }
    row.swap(next);
  }
  return row[static_cast<std::size_t>(m)];
}

TheoryVariance polynomial_covariance(const TestFunction& fi, const TestFunction& fj,
                                     const PeriodizedProfile& profile) {
  if (!fi.is_polynomial() || !fj.is_polynomial())
    throw DomainError("coefficient series needs polynomial test functions");
  const auto a = fi.coefficients();
  const auto b = fj.coefficients();
  cplx value{};
  double err = 0.0;
  const std::size_t top = std::min(a.size(), b.size());
  for (std::size_t l = 1; l < top; ++l) {
    const cplx weight = a[l] * std::conj(b[l]);
    if (weight == cplx{}) continue;
    const auto v = closed_form_variance(profile, static_cast<int>(l));
    value += weight * v.value;
    err += std::abs(weight) * v.trunc_error;
  }
  return {value, VarianceMethod::ClosedForm, err, 0.0, value};
}

TheoryVariance limiting_covariance(const TestFunction& fi, const TestFunction& fj, const CovarianceKernel& kernel,
                                   const ContourOptions& options) {
  check_contour(fi, fj, options);
  const double r = 1.0 + options.epsilon;

  auto evaluate = [&](int N, double* kernel_err) {
    std::vector<cplx> sigma(static_cast<std::size_t>(N));
    double worst = 0.0;
    for (int d = 0; d < N; ++d) {
      const auto kv = kernel.at(std::polar(r * r, 2.0 * kPi * d / N));
      sigma[static_cast<std::size_t>(d)] = kv.value;
      worst = std::max(worst, kv.trunc_error);
    }
    if (kernel_err) *kernel_err = worst;
    return contour_sum(fi, fj, r, N, sigma, true);
  };

  double kernel_err = 0.0;
  const cplx fine = evaluate(options.nodes, &kernel_err);
  const cplx coarse = evaluate(options.nodes / 2, nullptr);

  double mean_f = 0.0, mean_g = 0.0;
  for (int a = 0; a < options.nodes; ++a) {
    const cplx z = std::polar(r, 2.0 * kPi * a / options.nodes);
    mean_f += std::abs(fi(z) * z);
    mean_g += std::abs(fj(z) * z);
  }
  mean_f /= options.nodes;
  mean_g /= options.nodes;

  TheoryVariance out{fine, VarianceMethod::ContourQuadrature,
                     std::abs(fine - coarse) + kernel_err * mean_f * mean_g + 1e-13 * std::max(1.0, std::abs(fine)),
                     static_cast<double>(options.nodes), std::nullopt};
  if (fi.is_polynomial() && fj.is_polynomial())
    out.series_value = polynomial_covariance(fi, fj, kernel.params().profile).value;
  return out;
}

TheoryVariance limiting_covariance(const TestFunction& fi, const TestFunction& fj, const KernelParams& params,
                                   const ContourOptions& options) {
  return limiting_covariance(fi, fj, CovarianceKernel(params), options);
}

cplx pseudo_covariance(const TestFunction& fi, const TestFunction& fj, const KernelParams& params,
                       const ContourOptions& options) {
  params.validate();
  check_contour(fi, fj, options);
  // Coefficients of the pseudo-kernel are limits of (c/n) E[tr M^l tr M^m];
  // every term carries a pure moment E[x^k] of the entry law, all zero.
  const std::vector<cplx> pseudo_kernel(static_cast<std::size_t>(options.nodes), cplx{});
  return contour_sum(fi, fj, 1.0 + options.epsilon, options.nodes, pseudo_kernel, false);
}

}  // namespace bandclt
