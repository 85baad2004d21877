#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "bandclt/matgen.hpp"

namespace bandclt {

/// Test function f for a linear eigenvalue statistic.
class TestFunction {
 public:
  struct Monomial {
    int power;
  };
  struct Polynomial {
    std::vector<cplx> coeffs;  ///< coeffs[k] multiplies z^k
  };
  struct Analytic {
    std::function<cplx(cplx)> f;
    double radius;  ///< f is analytic on the open disk of this radius
    std::string name;
  };

  static TestFunction monomial(int power);
  static TestFunction polynomial(std::vector<cplx> coeffs);
  static TestFunction analytic(std::function<cplx(cplx)> f, double radius, std::string name);
  /// "z", "z2", "z^3", "poly:a0,a1,..." (real coefficients), "const:c", "exp".
  static TestFunction parse(const std::string& text);

  cplx operator()(cplx z) const;
  std::string name() const;
  bool is_polynomial() const noexcept { return !std::holds_alternative<Analytic>(kind_); }
  /// Power-series coefficients (polynomial kinds only).
  std::vector<cplx> coefficients() const;
  /// Radius of analyticity; infinite for polynomials.
  double radius() const noexcept;
  const std::variant<Monomial, Polynomial, Analytic>& kind() const noexcept { return kind_; }

 private:
  explicit TestFunction(std::variant<Monomial, Polynomial, Analytic> kind) : kind_(std::move(kind)) {}
  std::variant<Monomial, Polynomial, Analytic> kind_;
};

/// One realization of sqrt(c/n) * (sum_i f(lambda_i) - n f(0)).
struct LesSample {
  cplx value;
  std::size_t replicate;
  std::string function;
};

/// tr M^l via band products: M^ceil(l/2) is built by repeated band x band
/// multiplication (bandwidth grows by b per factor, switching to dense once
/// the band would cover the matrix) and the trace is the diagonal inner
/// product with M^floor(l/2). l = 0 gives n; negative l is rejected.
cplx trace_power(const BandMatrix& m, int l);

/// tr M^k for k = 0..max_power, sharing the intermediate powers.
std::vector<cplx> trace_powers(const BandMatrix& m, int max_power);

LesSample les_delta(const BandMatrix& m, const TestFunction& f, std::size_t dense_limit = kDefaultDenseLimit);

/// les_delta for several functions on one matrix; polynomial kinds share
/// one trace_powers pass, analytic kinds share one eigendecomposition.
std::vector<LesSample> les_delta(const BandMatrix& m, const std::vector<TestFunction>& fs,
                                 std::size_t dense_limit = kDefaultDenseLimit);

/// Eigenvalues of the densified matrix (order unspecified).
std::vector<cplx> spectrum(const BandMatrix& m, std::size_t dense_limit = kDefaultDenseLimit);

enum class ResolventMethod { LU, Neumann };

struct ResolventTrace {
  cplx value;             ///< tr (zI - M)^{-1} - n/z
  double norm_estimate;   ///< power-iteration estimate of ||M||
  bool well_separated;    ///< |z| > norm_estimate; false means ill-conditioned
};

ResolventTrace resolvent_trace(const BandMatrix& m, cplx z, ResolventMethod method = ResolventMethod::LU,
                               int neumann_terms = 40, std::size_t dense_limit = kDefaultDenseLimit);

/// sqrt of the Rayleigh quotient of M^*M after `iters` power-iteration steps
/// from a seeded random start; a lower bound on ||M|| that converges to it.
double spectral_norm(const BandMatrix& m, int iters, std::uint64_t seed = 0);

}  // namespace bandclt
