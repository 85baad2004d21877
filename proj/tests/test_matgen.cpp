#include <doctest.h>

#include <cmath>
#include <set>

#include "bandclt/errors.hpp"
#include "bandclt/matgen.hpp"
#include "bandclt/rng.hpp"

using namespace bandclt;

namespace {

BandSpec make_spec(std::size_t n, std::size_t b, Topology t, const VarianceProfile& w = VarianceProfile::uniform()) {
  const double nu = t == Topology::PeriodicNu ? double(2 * b + 1) / double(n) : 0.0;
  return BandSpec(n, b, t, PeriodizedProfile(w, nu));
}

VarianceProfile stepped() { return VarianceProfile::piecewise({-0.5, -0.25, 0.25, 0.5}, {0.5, 1.5, 0.5}); }

constexpr Topology kAll[] = {Topology::PeriodicNu, Topology::PeriodicZero, Topology::NonPeriodicZero};

}  // namespace

TEST_SUITE("matgen") {
  TEST_CASE("band geometry") {
    const auto per = sample(make_spec(8, 2, Topology::PeriodicNu), EntryLaw::ComplexStandardGaussian, 1, 0);
    for (std::size_t i = 0; i < 8; ++i) {
      int stored = 0;
      for (long long d = -2; d <= 2; ++d) stored += per.stored(i, d) && per.row(i)[d + 2] != cplx{};
      CHECK(stored == 5);
    }
    const auto non = sample(make_spec(8, 2, Topology::NonPeriodicZero), EntryLaw::ComplexStandardGaussian, 1, 0);
    int stored = 0;
    for (long long d = -2; d <= 2; ++d) stored += non.stored(0, d);
    CHECK(stored == 3);
    CHECK(non.stored(0, 0));
    CHECK(non.stored(0, 2));
    CHECK_FALSE(non.stored(0, -1));
    CHECK(non.row(0)[0] == cplx{});
  }

  TEST_CASE("spec validation") {
    CHECK_THROWS_AS(make_spec(3, 1, Topology::PeriodicZero), ConfigError);
    CHECK_THROWS_AS(make_spec(8, 4, Topology::PeriodicZero), ConfigError);  // c = 9 > n
    CHECK_THROWS_AS(BandSpec(8, 2, Topology::PeriodicNu, PeriodizedProfile(VarianceProfile::uniform(), 0.0)), ConfigError);
    CHECK_THROWS_AS(BandSpec(8, 2, Topology::NonPeriodicZero, PeriodizedProfile(VarianceProfile::uniform(), 0.5)),
                    ConfigError);
    CHECK_THROWS_AS(parse_topology("circular"), ConfigError);
    for (auto t : kAll) CHECK(parse_topology(topology_name(t)) == t);
  }

  TEST_CASE("band index sets") {
    // 1-based {7,8,1,2,3} and {1,2,3}
    CHECK(band_index_set(make_spec(8, 2, Topology::PeriodicZero), 0) == std::vector<std::size_t>{0, 1, 2, 6, 7});
    CHECK(band_index_set(make_spec(8, 2, Topology::NonPeriodicZero), 0) == std::vector<std::size_t>{0, 1, 2});
    for (std::size_t j = 0; j < 8; ++j) CHECK(band_index_set(make_spec(8, 2, Topology::PeriodicNu), j).size() == 5);
    CHECK_THROWS_AS(band_index_set(make_spec(8, 2, Topology::PeriodicZero), 8), DomainError);
  }

  TEST_CASE("band index sets match a brute-force construction") {
    for (std::size_t n = 4; n <= 13; ++n) {
      for (std::size_t b = 0; 2 * b + 1 <= n; ++b) {
        for (auto t : kAll) {
          const auto spec = make_spec(n, b, t);
          for (std::size_t j = 0; j < n; ++j) {
            std::set<std::size_t> expect;
            for (long long i = 0; i < (long long)n; ++i) {
              for (long long s : {-1LL, 0LL, 1LL}) {
                if (t == Topology::NonPeriodicZero && s != 0) continue;
                if (std::llabs(i - (long long)j + s * (long long)n) <= (long long)b) expect.insert(std::size_t(i));
              }
            }
            const auto got = band_index_set(spec, j);
            CHECK(std::set<std::size_t>(got.begin(), got.end()) == expect);
            // and the stored entries of the sampled matrix are exactly these rows
            const auto m = sample(spec, EntryLaw::ComplexStandardGaussian, 3, 0);
            for (std::size_t i = 0; i < n; ++i) CHECK((m(i, j) != cplx{}) == (expect.count(i) == 1));
          }
        }
      }
    }
  }

  TEST_CASE("entries follow the topology's scaling rule exactly") {
    for (auto t : kAll) {
      const auto spec = make_spec(12, 3, t, stepped());
      const double c = 7.0, nn = 12.0;
      const auto m = sample(spec, EntryLaw::ComplexStandardGaussian, 99, 5);
      const CounterRng rng(99, Stream::MatrixEntries, 5);
      for (std::size_t i = 0; i < 12; ++i) {
        for (std::size_t j = 0; j < 12; ++j) {
          const double diff = double(i) - double(j);
          double s = 0.0;
          if (t == Topology::NonPeriodicZero) {
            s = std::abs(diff) <= 3 ? std::sqrt(stepped()(diff / c)) : 0.0;
          } else if (t == Topology::PeriodicZero) {
            for (double shift : {0.0, nn, -nn}) s += std::sqrt(stepped()((diff + shift) / c));
          } else {
            double circ = std::remainder(diff, nn);
            s = std::abs(circ) <= 3 ? std::sqrt(spec.profile().evaluate(circ / c)) : 0.0;
          }
          const cplx expect = rng.complex_gaussian(i * 12 + j) * (s / std::sqrt(c));
          CHECK(std::abs(m(i, j) - expect) < 1e-15);
        }
      }
    }
  }

  TEST_CASE("determinism and replicate independence") {
    const auto spec = make_spec(64, 5, Topology::PeriodicZero);
    const auto a = sample(spec, EntryLaw::ComplexStandardGaussian, 7, 2);
    const auto b = sample(spec, EntryLaw::ComplexStandardGaussian, 7, 2);
    CHECK(std::equal(a.bands().begin(), a.bands().end(), b.bands().begin()));
    const auto c = sample(spec, EntryLaw::ComplexStandardGaussian, 7, 3);
    CHECK_FALSE(std::equal(a.bands().begin(), a.bands().end(), c.bands().begin()));
  }

  TEST_CASE("distinct replicates are uncorrelated") {
    const auto spec = make_spec(1001, 500, Topology::PeriodicNu);  // ~10^6 stored entries
    const auto a = sample(spec, EntryLaw::ComplexStandardGaussian, 5, 0);
    const auto b = sample(spec, EntryLaw::ComplexStandardGaussian, 5, 1);
    cplx cross{};
    double na = 0, nb = 0;
    for (std::size_t k = 0; k < a.bands().size(); ++k) {
      cross += a.bands()[k] * std::conj(b.bands()[k]);
      na += std::norm(a.bands()[k]);
      nb += std::norm(b.bands()[k]);
    }
    const double rho = std::abs(cross) / std::sqrt(na * nb);
    CHECK(rho < 4.0 / std::sqrt(double(a.bands().size())));
  }

  TEST_CASE("single-entry variance over resamples") {
    constexpr int R = 100000;
    for (auto t : kAll) {
      const auto spec = make_spec(8, 2, t);
      double sum = 0.0, sum2 = 0.0;
      for (int r = 0; r < R; ++r) {
        const double v = std::norm(sample(spec, EntryLaw::ComplexStandardGaussian, 11, std::size_t(r))(3, 4));
        sum += v;
        sum2 += v * v;
      }
      const double mean = sum / R;
      const double se = std::sqrt((sum2 / R - mean * mean) / R);
      CHECK(std::abs(mean - 1.0 / 5.0) < 3 * se);
    }
  }

  TEST_CASE("variance profile realized per offset") {
    for (auto t : {Topology::PeriodicNu, Topology::NonPeriodicZero}) {
      const std::size_t n = 64, b = 10, R = 400;
      const auto spec = make_spec(n, b, t, stepped());
      std::vector<double> sum(2 * b + 1), sum2(2 * b + 1), count(2 * b + 1);
      for (std::size_t r = 0; r < R; ++r) {
        const auto m = sample(spec, EntryLaw::ComplexStandardGaussian, 21, r);
        for (std::size_t i = 0; i < n; ++i)
          for (long long d = -(long long)b; d <= (long long)b; ++d) {
            if (!m.stored(i, d)) continue;
            const double v = std::norm(m.row(i)[d + b]);
            sum[d + b] += v;
            sum2[d + b] += v * v;
            count[d + b] += 1;
          }
      }
      const double c = double(2 * b + 1);
      for (long long d = -(long long)b; d <= (long long)b; ++d) {
        const double mean = sum[d + b] / count[d + b];
        const double se = std::sqrt((sum2[d + b] / count[d + b] - mean * mean) / count[d + b]);
        const double expect = stepped()(-double(d) / c) / c;
        CAPTURE(d);
        CHECK(std::abs(mean - expect) < 3 * se);
      }
    }
  }

  TEST_CASE("pure moments of the entries vanish") {
    const auto spec = make_spec(400, 100, Topology::PeriodicZero);
    const auto m = sample(spec, EntryLaw::ComplexStandardGaussian, 8, 0);
    cplx p2{}, p3{};
    double s2 = 0, s4 = 0, s6 = 0;
    for (const cplx& x : m.bands()) {
      p2 += x * x;
      p3 += x * x * x;
      s4 += std::pow(std::norm(x), 2);
      s6 += std::pow(std::norm(x), 3);
      s2 += std::norm(x);
    }
    // |sum x^k| is of order sqrt(sum |x|^{2k})
    CHECK(std::abs(p2) < 4 * std::sqrt(s4));
    CHECK(std::abs(p3) < 4 * std::sqrt(s6));
    CHECK(s2 / double(m.bands().size()) == doctest::Approx(1.0 / 201).epsilon(0.02));
  }

  TEST_CASE("dense conversion") {
    const auto spec = make_spec(9, 2, Topology::PeriodicZero);
    const BandMatrix zero(spec, std::vector<cplx>(9 * 5));
    CHECK(to_dense(zero).isZero(0.0));
    for (auto t : kAll) {
      const auto m = sample(make_spec(9, 2, t), EntryLaw::ComplexStandardGaussian, 4, 1);
      const auto d = to_dense(m);
      for (std::size_t i = 0; i < 9; ++i)
        for (std::size_t j = 0; j < 9; ++j) CHECK(d(i, j) == m(i, j));
      for (std::size_t i = 0; i < 9; ++i)
        for (long long off = -2; off <= 2; ++off)
          if (m.stored(i, off)) CHECK(d(i, m.column(i, off)) == m.row(i)[off + 2]);
      if (t == Topology::NonPeriodicZero) CHECK(d(0, 8) == cplx{});
      CHECK(d(0, 4) == cplx{});
    }
    CHECK_THROWS_AS(to_dense(zero, 8), ConfigError);
  }

  TEST_CASE("matrix-vector products agree with the dense matrix") {
    for (auto t : kAll) {
      const auto m = sample(make_spec(11, 3, t, stepped()), EntryLaw::ComplexStandardGaussian, 6, 0);
      const auto d = to_dense(m);
      Eigen::VectorXcd x(11);
      for (int k = 0; k < 11; ++k) x(k) = cplx(std::sin(k + 1.0), std::cos(2.0 * k));
      std::vector<cplx> xv(x.data(), x.data() + 11), y(11), z(11);
      m.multiply(xv, y);
      m.multiply_adjoint(xv, z);
      const Eigen::VectorXcd ye = d * x, ze = d.adjoint() * x;
      for (int k = 0; k < 11; ++k) {
        CHECK(std::abs(y[k] - ye(k)) < 1e-14);
        CHECK(std::abs(z[k] - ze(k)) < 1e-14);
      }
    }
  }
}
