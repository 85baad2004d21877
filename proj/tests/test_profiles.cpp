#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "bandclt/errors.hpp"
#include "bandclt/profiles.hpp"

using namespace bandclt;

namespace {

constexpr double kPi = std::numbers::pi;

// An even, non-uniform profile: 1/2 on the outer quarters, 3/2 in the middle.
VarianceProfile stepped() { return VarianceProfile::piecewise({-0.5, -0.25, 0.25, 0.5}, {0.5, 1.5, 0.5}); }

// A lopsided (non-even) profile, flat near 0.
VarianceProfile lopsided() { return VarianceProfile::piecewise({-0.5, -0.125, 0.125, 0.5}, {1.0 / 3.0, 2.0, 1.0}); }

// Composite Simpson of w(x) exp(2 pi i t x) over [-1/2, 1/2], subdivided at the breaks.
std::complex<double> simpson_transform(const VarianceProfile& w, double t, int panels_per_piece = 2000) {
  std::complex<double> total{};
  const auto& br = w.breaks();
  for (std::size_t p = 0; p + 1 < br.size(); ++p) {
    const double a = br[p], b = br[p + 1];
    const double h = (b - a) / (2 * panels_per_piece);
    auto f = [&](double x) {
      // evaluate just inside the piece so jumps at the ends do not matter
      const double xe = std::clamp(x, a + 1e-15, b - 1e-15);
      return w(xe) * std::polar(1.0, 2 * kPi * t * x);
    };
    std::complex<double> s = f(a) + f(b);
    for (int i = 1; i < 2 * panels_per_piece; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    total += s * h / 3.0;
  }
  return total;
}

}  // namespace

TEST_SUITE("profiles") {
  TEST_CASE("evaluate reduces modulo the period") {
    const PeriodizedProfile half(VarianceProfile::uniform(), 0.5);
    CHECK(half.evaluate(0.0) == 1.0);
    CHECK(half.evaluate(2.0) == 1.0);
    CHECK(half.evaluate(0.75) == 0.0);  // in the gap between copies
    const PeriodizedProfile narrow(VarianceProfile::uniform(), 0.0);
    CHECK(narrow.evaluate(0.7) == 0.0);
    CHECK(narrow.evaluate(0.3) == 1.0);
  }

  TEST_CASE("periodized profile is periodic and matches the base on the fundamental domain") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> unif(-3.0, 3.0);
    for (double nu : {1.0, 0.5, 0.3, 0.125}) {
      const PeriodizedProfile p(stepped(), nu);
      for (int trial = 0; trial < 2000; ++trial) {
        const double x = unif(gen);
        // stay away from the breakpoints where rounding of x + 1/nu could cross a jump
        const double r = std::remainder(x, 1.0 / nu);
        if (std::abs(std::abs(r) - 0.25) < 1e-9 || std::abs(std::abs(r) - 0.5) < 1e-9) continue;
        CHECK(p.evaluate(x + 1.0 / nu) == doctest::Approx(p.evaluate(x)).epsilon(1e-14));
        if (std::abs(x) <= 0.5 / nu) CHECK(p.evaluate(x) == stepped()(x));
      }
    }
  }

  TEST_CASE("fourier coefficients of the uniform profile") {
    for (double nu : {1.0, 0.5, 0.25}) CHECK(PeriodizedProfile(VarianceProfile::uniform(), nu).fourier_coeff(0).real() == doctest::Approx(1.0).epsilon(1e-15));
    const auto c = PeriodizedProfile(VarianceProfile::uniform(), 0.5).fourier_coeff(1);
    CHECK(c.real() == doctest::Approx(2.0 / kPi).epsilon(1e-14));
    CHECK(c.imag() == 0.0);
    for (long long k = 1; k < 50; ++k) CHECK(std::abs(PeriodizedProfile(VarianceProfile::uniform(), 1.0).fourier_coeff(k)) < 1e-15);
    CHECK_THROWS_AS(PeriodizedProfile(VarianceProfile::uniform(), 0.0).fourier_coeff(1), DomainError);
  }

  TEST_CASE("fourier transform of the uniform profile") {
    const PeriodizedProfile p(VarianceProfile::uniform(), 0.0);
    CHECK(p.fourier_transform(0.0).real() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(p.fourier_transform(1.0)) < 1e-15);
    // sin(pi/2)/(pi/2), and an independent quadrature of the same integral
    CHECK(p.fourier_transform(0.5).real() == doctest::Approx(2.0 / kPi).epsilon(1e-14));
    CHECK(p.fourier_transform(0.5).real() == doctest::Approx(simpson_transform(VarianceProfile::uniform(), 0.5).real()).epsilon(1e-12));
    CHECK_THROWS_AS(PeriodizedProfile(VarianceProfile::uniform(), 0.5).fourier_transform(1.0), DomainError);
  }

  TEST_CASE("closed-form transforms match quadrature") {
    const auto tab = VarianceProfile::tabulated({0.0, 1.0, 2.0, 1.0, 0.0});
    const auto skew = VarianceProfile::tabulated({0.2, 0.6, 1.0, 1.4, 1.8});
    for (const auto& w : {stepped(), lopsided(), tab, skew}) {
      for (double t : {0.0, 0.3, 1.0, 2.7, 11.5}) {
        const auto exact = w.transform(t);
        const auto quad = simpson_transform(w, t);
        CHECK(std::abs(exact - quad) < 1e-10);
      }
    }
  }

  TEST_CASE("transforms are bounded by one") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> unif(-200.0, 200.0);
    const auto tab = VarianceProfile::tabulated({0.0, 1.0, 2.0, 1.0, 0.0});
    for (const auto& w : {VarianceProfile::uniform(), stepped(), lopsided(), tab}) {
      const PeriodizedProfile zero(w, 0.0), per(w, 0.37);
      for (int i = 0; i < 500; ++i) {
        CHECK(std::abs(zero.fourier_transform(unif(gen))) <= 1.0 + 1e-15);
        CHECK(std::abs(per.fourier_coeff(static_cast<long long>(unif(gen)))) <= 1.0 + 1e-15);
      }
    }
  }

  TEST_CASE("even profiles have real coefficients") {
    const PeriodizedProfile p(stepped(), 0.3);
    for (long long k = -20; k <= 20; ++k) CHECK(std::abs(p.fourier_coeff(k).imag()) < 1e-14);
    const PeriodizedProfile q(lopsided(), 0.3);
    CHECK(std::abs(q.fourier_coeff(3).imag()) > 1e-3);
  }

  TEST_CASE("self-convolution at zero") {
    const PeriodizedProfile narrow(VarianceProfile::uniform(), 0.0);
    CHECK(narrow.self_convolution_at_zero(1, 256) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(narrow.self_convolution_at_zero(2, 1024) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(narrow.self_convolution_at_zero(3, 1024) == doctest::Approx(0.75).epsilon(1e-14));
    const PeriodizedProfile full(VarianceProfile::uniform(), 1.0);
    CHECK(full.self_convolution_at_zero(5, 1024) == doctest::Approx(1.0).epsilon(1e-13));
    // nu sum_k w_k^5 is a single term when nu = 1
    CHECK(std::pow(full.fourier_coeff(0).real(), 5) == doctest::Approx(1.0));
    // l = 2 of an even profile is the integral of w^2
    CHECK(PeriodizedProfile(stepped(), 0.0).self_convolution_at_zero(2, 1024) ==
          doctest::Approx(stepped().square_integral()).epsilon(1e-13));
    CHECK_THROWS_AS(narrow.self_convolution_at_zero(2, 1000), DomainError);
    CHECK_THROWS_AS(narrow.self_convolution_at_zero(2, 128), DomainError);
    CHECK_THROWS_AS(narrow.self_convolution_at_zero(0, 1024), DomainError);
    // 256 cells cannot resolve a 1/nu period when nu is tiny
    CHECK_THROWS_AS(PeriodizedProfile(VarianceProfile::uniform(), 0.001).self_convolution_at_zero(2, 256), DomainError);
  }

  TEST_CASE("Parseval-type sums converge to the self-convolution") {
    constexpr long long K = 10000;
    for (double nu : {1.0, 0.5}) {
      for (const auto& w : {VarianceProfile::uniform(), stepped()}) {
        const PeriodizedProfile p(w, nu);
        for (int l = 2; l <= 8; ++l) {
          double sum = std::pow(p.fourier_coeff(0).real(), l);
          for (long long k = 1; k <= K; ++k) sum += 2.0 * std::pow(p.fourier_coeff(k), l).real();
          const double conv = p.self_convolution_at_zero(l, 1024);
          // |w_k| <= B/(k nu) bounds the neglected terms
          const double B = w.decay_constant();
          const double tail = 2.0 * nu * std::pow(B / nu, l) * std::pow(static_cast<double>(K), 1.0 - l) / (l - 1);
          // the uniform profile at nu = 1 has a single non-zero coefficient
          const bool literal = l >= 4 || (nu == 1.0 && w.kind() == ProfileKind::Uniform);
          const double tol = literal ? 1e-8 : std::max(1e-8, tail);
          CAPTURE(nu);
          CAPTURE(l);
          CHECK(std::abs(nu * sum - conv) <= tol);
        }
      }
    }
  }

  TEST_CASE("Fejer means recover w_nu(0)") {
    const PeriodizedProfile p(VarianceProfile::uniform(), 0.5);
    constexpr long long K = 1 << 16;
    double s = 1.0;
    for (long long k = 1; k <= K; ++k) s += 2.0 * (1.0 - double(k) / double(K + 1)) * p.fourier_coeff(k).real();
    CHECK(std::abs(0.5 * s - p.evaluate(0.0)) < 1e-4);
  }

  TEST_CASE("profile validation") {
    CHECK_THROWS_AS(VarianceProfile::piecewise({-0.5, 0.5}, {0.9}), ConfigError);
    CHECK_THROWS_AS(VarianceProfile::piecewise({-0.5, 0.0, 0.5}, {0.5, 1.5}), ConfigError);  // jump at 0
    CHECK_THROWS_AS(VarianceProfile::piecewise({-0.5, -0.25, 0.25, 0.5}, {2.5, 0.5, -0.5}), ConfigError);
    CHECK_THROWS_AS(VarianceProfile::piecewise({-0.4, 0.5}, {1.0}), ConfigError);
    CHECK_THROWS_AS(VarianceProfile::piecewise({-0.5, 0.1, 0.1, 0.5}, {1, 1, 1}), ConfigError);
    CHECK_THROWS_AS(VarianceProfile::piecewise({-0.5, 0.5}, {0.0}), ConfigError);
    CHECK_THROWS_AS(VarianceProfile::tabulated({1.0, 1.0}), ConfigError);
    CHECK_THROWS_AS(VarianceProfile::tabulated({0.0, 1.0, 0.0}), ConfigError);  // integrates to 1/2
    CHECK_NOTHROW(VarianceProfile::tabulated({0.0, 1.0, 2.0, 1.0, 0.0}));
    CHECK_THROWS_AS(PeriodizedProfile(VarianceProfile::uniform(), 1.5), ConfigError);
  }

  TEST_CASE("profile summaries") {
    const auto w = stepped();
    CHECK(w.normalization() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(w.sup() == 1.5);
    CHECK(w.is_even());
    CHECK_FALSE(lopsided().is_even());
    CHECK(w.integral(-0.25, 0.25) == doctest::Approx(0.75));
    CHECK(w.exact_resolution() == 4);
    CHECK(VarianceProfile::uniform().exact_resolution() == 1);
    CHECK(lopsided().exact_resolution() == 8);
    const auto tab = VarianceProfile::tabulated({0.0, 1.0, 2.0, 1.0, 0.0});
    CHECK(tab.exact_resolution() == 0);
    CHECK(tab(0.125) == doctest::Approx(1.5));
    double mass = 0.0;
    for (double m : w.cell_masses(16)) mass += m;
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-15));
  }

  TEST_CASE("convolution powers are exact on aligned grids") {
    const PeriodizedProfile p(stepped(), 0.0);
    const ConvolutionPowers exact(p, 4, 6);
    const ConvolutionPowers fine(p, 64, 6);
    CHECK(exact.exact());
    for (int l = 1; l <= 6; ++l) CHECK(exact.at_zero(l) == doctest::Approx(fine.at_zero(l)).epsilon(1e-12));
    CHECK_THROWS_AS(exact.at_zero(7), DomainError);
    const ConvolutionPowers tab(PeriodizedProfile(VarianceProfile::tabulated({0.0, 1.0, 2.0, 1.0, 0.0}), 0.0), 64, 3);
    CHECK_FALSE(tab.exact());
  }
}
