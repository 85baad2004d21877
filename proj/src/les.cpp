#include "bandclt/les.hpp"

#include <charconv>
#include <cmath>
#include <optional>
#include <sstream>

#include "bandclt/errors.hpp"
#include "bandclt/rng.hpp"

namespace bandclt {
namespace {

// A power of a band matrix: band storage while the band fits, dense after.
class BandOperator {
 public:
  explicit BandOperator(const BandMatrix& m)
      : n_(m.n()),
        b_(static_cast<long long>(m.half_width())),
        periodic_(m.periodic()),
        data_(m.bands().begin(), m.bands().end()) {}

  BandOperator(std::size_t n, long long b, bool periodic)
      : n_(n), b_(b), periodic_(periodic), data_(n * static_cast<std::size_t>(2 * b + 1)) {}

  explicit BandOperator(Eigen::MatrixXcd dense)
      : n_(static_cast<std::size_t>(dense.rows())), b_(0), periodic_(false), dense_(std::move(dense)) {}

  bool is_dense() const noexcept { return dense_.has_value(); }

  BandOperator multiply(const BandOperator& rhs) const {
    const long long b = b_ + rhs.b_;
    if (is_dense() || rhs.is_dense() || static_cast<std::size_t>(2 * b + 1) > n_)
      return BandOperator(Eigen::MatrixXcd(to_dense() * rhs.to_dense()));

    BandOperator out(n_, b, periodic_);
    const std::size_t w1 = width(), w2 = rhs.width(), w = out.width();
    for (std::size_t i = 0; i < n_; ++i) {
      cplx* dst = &out.data_[i * w];
      for (long long d1 = -b_; d1 <= b_; ++d1) {
        const cplx a = data_[i * w1 + static_cast<std::size_t>(d1 + b_)];
        if (a == cplx{}) continue;
        const long long k = column(i, d1);
        if (k < 0) continue;
        const cplx* src = &rhs.data_[static_cast<std::size_t>(k) * w2];
        cplx* base = dst + (d1 + b_);  // slot of offset d1 + d2 is d1 + d2 + b
        for (std::size_t s = 0; s < w2; ++s) base[s] += a * src[s];
      }
    }
    return out;
  }

  cplx trace() const {
    if (is_dense()) return dense_->trace();
    cplx t{};
    for (std::size_t i = 0; i < n_; ++i) t += data_[i * width() + static_cast<std::size_t>(b_)];
    return t;
  }

  // tr(this * rhs)
  cplx trace_product(const BandOperator& rhs) const {
    if (is_dense() && rhs.is_dense()) return dense_->cwiseProduct(rhs.dense_->transpose()).sum();
    if (!is_dense() && rhs.is_dense()) return trace_with_dense(*rhs.dense_);
    if (is_dense()) return rhs.trace_with_dense(*dense_);

    // sum_i sum_d A(i, i+d) B(i+d, i)
    const long long reach = std::min(b_, rhs.b_);
    cplx t{};
    for (std::size_t i = 0; i < n_; ++i) {
      for (long long d = -reach; d <= reach; ++d) {
        const long long j = column(i, d);
        if (j < 0) continue;
        t += data_[i * width() + static_cast<std::size_t>(d + b_)] *
             rhs.data_[static_cast<std::size_t>(j) * rhs.width() + static_cast<std::size_t>(-d + rhs.b_)];
      }
    }
    return t;
  }

 private:
  std::size_t width() const noexcept { return static_cast<std::size_t>(2 * b_ + 1); }

  long long column(std::size_t i, long long d) const noexcept {
    const auto n = static_cast<long long>(n_);
    long long j = static_cast<long long>(i) + d;
    if (periodic_) {
      j %= n;
      return j < 0 ? j + n : j;
    }
    return (j < 0 || j >= n) ? -1 : j;
  }

  // sum_{i,j} band(i,j) dense(j,i)
  cplx trace_with_dense(const Eigen::MatrixXcd& dense) const {
    cplx t{};
    for (std::size_t i = 0; i < n_; ++i) {
      for (long long d = -b_; d <= b_; ++d) {
        const long long j = column(i, d);
        if (j < 0) continue;
        t += data_[i * width() + static_cast<std::size_t>(d + b_)] *
             dense(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
      }
    }
    return t;
  }

  Eigen::MatrixXcd to_dense() const {
    if (is_dense()) return *dense_;
    const auto n = static_cast<Eigen::Index>(n_);
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n, n);
    for (std::size_t i = 0; i < n_; ++i) {
      for (long long d = -b_; d <= b_; ++d) {
        const long long j = column(i, d);
        if (j >= 0) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += data_[i * width() + static_cast<std::size_t>(d + b_)];
      }
    }
    return out;
  }

  std::size_t n_;
  long long b_;
  bool periodic_;
  std::vector<cplx> data_;
  std::optional<Eigen::MatrixXcd> dense_;
};

double scale_factor(const BandMatrix& m) {
  return std::sqrt(static_cast<double>(m.width()) / static_cast<double>(m.n()));
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double parse_double(const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + text + "'");
  }
  if (used != text.size()) throw ConfigError("not a number: '" + text + "'");
  return v;
}

}  // namespace

TestFunction TestFunction::monomial(int power) {
  if (power < 1) throw ConfigError("monomial power must be >= 1");
  return TestFunction(Monomial{power});
}

TestFunction TestFunction::polynomial(std::vector<cplx> coeffs) {
  if (coeffs.empty()) throw ConfigError("polynomial needs at least one coefficient");
  return TestFunction(Polynomial{std::move(coeffs)});
}

TestFunction TestFunction::analytic(std::function<cplx(cplx)> f, double radius, std::string name) {
  if (!(radius > 0.0)) throw ConfigError("analyticity radius must be > 0");
  return TestFunction(Analytic{std::move(f), radius, std::move(name)});
}

TestFunction TestFunction::parse(const std::string& text) {
  if (text == "z") return monomial(1);
  if (text == "exp")
    return analytic([](cplx z) { return std::exp(z); }, std::numeric_limits<double>::infinity(), "exp");
  if (text.size() > 1 && text[0] == 'z') {
    std::string digits = text.substr(text[1] == '^' ? 2 : 1);
    int power = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), power);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || digits.empty())
      throw ConfigError("cannot parse test function '" + text + "'");
    return monomial(power);
  }
  if (text.rfind("const:", 0) == 0) return polynomial({parse_double(text.substr(6))});
  if (text.rfind("poly:", 0) == 0) {
    std::vector<cplx> coeffs;
    std::stringstream ss(text.substr(5));
    std::string item;
    while (std::getline(ss, item, ',')) coeffs.emplace_back(parse_double(item), 0.0);
    return polynomial(std::move(coeffs));
  }
  throw ConfigError("cannot parse test function '" + text + "'");
}

cplx TestFunction::operator()(cplx z) const {
  if (const auto* mono = std::get_if<Monomial>(&kind_)) return std::pow(z, mono->power);
  if (const auto* poly = std::get_if<Polynomial>(&kind_)) {
    cplx acc{};
    for (auto it = poly->coeffs.rbegin(); it != poly->coeffs.rend(); ++it) acc = acc * z + *it;
    return acc;
  }
  return std::get<Analytic>(kind_).f(z);
}

std::string TestFunction::name() const {
  if (const auto* mono = std::get_if<Monomial>(&kind_))
    return mono->power == 1 ? "z" : "z" + std::to_string(mono->power);
  if (const auto* poly = std::get_if<Polynomial>(&kind_)) {
    if (poly->coeffs.size() == 1 && poly->coeffs[0].imag() == 0.0) return "const:" + format_number(poly->coeffs[0].real());
    std::string out = "poly:";
    for (std::size_t k = 0; k < poly->coeffs.size(); ++k) {
      if (k) out += ",";
      out += format_number(poly->coeffs[k].real());
    }
    return out;
  }
  return std::get<Analytic>(kind_).name;
}

std::vector<cplx> TestFunction::coefficients() const {
  if (const auto* mono = std::get_if<Monomial>(&kind_)) {
    std::vector<cplx> c(static_cast<std::size_t>(mono->power) + 1);
    c.back() = 1.0;
    return c;
  }
  if (const auto* poly = std::get_if<Polynomial>(&kind_)) return poly->coeffs;
  throw DomainError("analytic test functions have no stored coefficients");
}

double TestFunction::radius() const noexcept {
  if (const auto* a = std::get_if<Analytic>(&kind_)) return a->radius;
  return std::numeric_limits<double>::infinity();
}

std::vector<cplx> trace_powers(const BandMatrix& m, int max_power) {
  if (max_power < 0) throw DomainError("trace power must be non-negative");
  std::vector<cplx> traces(static_cast<std::size_t>(max_power) + 1);
  traces[0] = static_cast<double>(m.n());
  if (max_power == 0) return traces;

  std::vector<BandOperator> powers;
  powers.emplace_back(m);
  const int top = (max_power + 1) / 2;
  while (static_cast<int>(powers.size()) < top) powers.push_back(powers.back().multiply(powers.front()));

  traces[1] = powers[0].trace();
  for (int l = 2; l <= max_power; ++l) {
    const int p = (l + 1) / 2, q = l / 2;
    traces[static_cast<std::size_t>(l)] =
        powers[static_cast<std::size_t>(p - 1)].trace_product(powers[static_cast<std::size_t>(q - 1)]);
  }
  return traces;
}

cplx trace_power(const BandMatrix& m, int l) {
  if (l < 0) throw DomainError("trace power must be non-negative");
  return trace_powers(m, l)[static_cast<std::size_t>(l)];
}

std::vector<cplx> spectrum(const BandMatrix& m, std::size_t dense_limit) {
  const Eigen::MatrixXcd dense = to_dense(m, dense_limit);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(dense, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) throw SpectrumError("eigensolver did not converge", m.replicate());
  const auto& ev = solver.eigenvalues();
  return std::vector<cplx>(ev.data(), ev.data() + ev.size());
}

std::vector<LesSample> les_delta(const BandMatrix& m, const std::vector<TestFunction>& fs,
                                 std::size_t dense_limit) {
  const double scale = scale_factor(m);
  int max_degree = 0;
  bool need_spectrum = false;
  for (const auto& f : fs) {
    if (f.is_polynomial())
      max_degree = std::max(max_degree, static_cast<int>(f.coefficients().size()) - 1);
    else
      need_spectrum = true;
  }
  if (need_spectrum && m.n() > dense_limit)
    throw ConfigError("analytic test functions need the dense spectrum, but n = " + std::to_string(m.n()) +
                      " exceeds dense_limit; truncate f to a polynomial instead");

  const std::vector<cplx> traces = trace_powers(m, max_degree);
  std::vector<cplx> eigenvalues;
  if (need_spectrum) eigenvalues = spectrum(m, dense_limit);

  std::vector<LesSample> out;
  out.reserve(fs.size());
  for (const auto& f : fs) {
    cplx value{};
    if (f.is_polynomial()) {
      // sum_i f(lambda_i) - n f(0) = sum_{k>=1} a_k tr M^k
      const auto coeffs = f.coefficients();
      for (std::size_t k = 1; k < coeffs.size(); ++k) value += coeffs[k] * traces[k];
    } else {
      const cplx f0 = f(cplx{});
      for (const cplx& lambda : eigenvalues) value += f(lambda) - f0;
    }
    out.push_back({scale * value, m.replicate(), f.name()});
  }
  return out;
}

LesSample les_delta(const BandMatrix& m, const TestFunction& f, std::size_t dense_limit) {
  return les_delta(m, std::vector<TestFunction>{f}, dense_limit).front();
}

ResolventTrace resolvent_trace(const BandMatrix& m, cplx z, ResolventMethod method, int neumann_terms,
                               std::size_t dense_limit) {
  if (z == cplx{}) throw DomainError("resolvent trace needs z != 0");
  const double norm = spectral_norm(m, 50);
  const double n = static_cast<double>(m.n());
  cplx value{};
  if (method == ResolventMethod::LU) {
    const auto size = static_cast<Eigen::Index>(m.n());
    Eigen::MatrixXcd a = -to_dense(m, dense_limit);
    a.diagonal().array() += z;
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
    // an exactly zero pivot makes the estimate itself non-finite
    const double rcond = lu.rcond();
    const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (!(rcond > 1e-14) || !std::isfinite(rcond) || min_pivot == 0.0) throw NumericalError("zI - M is singular to working precision");
    const Eigen::MatrixXcd inv = lu.solve(Eigen::MatrixXcd::Identity(size, size));
    value = inv.trace() - n / z;
    if (!std::isfinite(value.real()) || !std::isfinite(value.imag()))
      throw NumericalError("zI - M is singular to working precision");
  } else {
    if (neumann_terms < 1) throw DomainError("Neumann series needs at least one term");
    const auto traces = trace_powers(m, neumann_terms);
    cplx zpow = 1.0 / (z * z);
    for (int l = 1; l <= neumann_terms; ++l) {
      value += zpow * traces[static_cast<std::size_t>(l)];
      zpow /= z;
    }
  }
  return {value, norm, std::abs(z) > norm};
}

double spectral_norm(const BandMatrix& m, int iters, std::uint64_t seed) {
  if (iters < 1) throw DomainError("power iteration needs at least one step");
  const std::size_t n = m.n();
  const CounterRng rng(seed, Stream::PowerIteration, static_cast<std::uint32_t>(m.replicate()));
  std::vector<cplx> v(n), u(n), w(n);
  for (std::size_t k = 0; k < n; ++k) v[k] = rng.complex_gaussian(k);

  auto normalize = [](std::vector<cplx>& x) {
    double s = 0.0;
    for (const auto& e : x) s += std::norm(e);
    s = std::sqrt(s);
    if (s == 0.0) return 0.0;
    for (auto& e : x) e /= s;
    return s;
  };
  normalize(v);
  for (int it = 0; it < iters; ++it) {
    m.multiply(v, u);
    m.multiply_adjoint(u, w);
    if (normalize(w) == 0.0) return 0.0;
    v.swap(w);
  }
  m.multiply(v, u);
  double s = 0.0;
  for (const auto& e : u) s += std::norm(e);
  return std::sqrt(s);
}

}  // namespace bandclt
