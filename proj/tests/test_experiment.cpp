#include <doctest.h>

#include <cmath>
#include <random>

#include <json.hpp>

#include "bandclt/errors.hpp"
#include "bandclt/experiment.hpp"

using namespace bandclt;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.n = 60;
  c.bandwidth.kind = BandwidthRule::Kind::Explicit;
  c.bandwidth.value = 4;
  c.functions = {"z", "z2", "poly:1,0,2"};
  c.replicates = 5;
  c.seed = 3;
  c.workers = 1;
  c.norm_iters = 10;
  return c;
}

nlohmann::json without_execution(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  j.erase("execution");
  return j;
}

}  // namespace

TEST_SUITE("experiment") {
  TEST_CASE("normality diagnostics are calibrated on Gaussian input") {
    std::mt19937_64 gen(12345);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<cplx> xs(10000);
    for (auto& x : xs) x = cplx(g(gen), g(gen));
    const auto d = normality_diagnostics(xs);
    CHECK(d.count == 10000);
    // standard errors sqrt(6/N) and sqrt(24/N)
    CHECK(std::abs(d.skew_re) < 4 * std::sqrt(6.0 / 1e4));
    CHECK(std::abs(d.skew_im) < 4 * std::sqrt(6.0 / 1e4));
    CHECK(std::abs(d.excess_kurtosis_re) < 4 * std::sqrt(24.0 / 1e4));
    CHECK(std::abs(d.excess_kurtosis_im) < 4 * std::sqrt(24.0 / 1e4));
    CHECK(std::abs(d.corr_re_im) < 4 / 100.0);
    CHECK(d.variance_ratio == doctest::Approx(1.0).epsilon(0.06));
    // chi-square with 2 degrees of freedom: P(JB > 13.8) ~ 1e-3
    CHECK(d.jarque_bera_re < 13.8);
    CHECK(d.jarque_bera_im < 13.8);
  }

  TEST_CASE("normality diagnostics reject small or degenerate samples") {
    std::vector<cplx> few(49, cplx(1.0, 2.0));
    CHECK_THROWS_AS(normality_diagnostics(few), DomainError);
    std::vector<cplx> constant(100, cplx(1.0, 2.0));
    CHECK_THROWS_AS(normality_diagnostics(constant), DomainError);
    std::vector<cplx> real_only(100);
    for (std::size_t i = 0; i < real_only.size(); ++i) real_only[i] = double(i);
    CHECK_THROWS_AS(normality_diagnostics(real_only), DomainError);
  }

  TEST_CASE("quantiles") {
    const auto q = quantiles({4.0, 0.0, 1.0, 3.0, 2.0});
    CHECK(q.q50 == 2.0);
    CHECK(q.q25 == 1.0);
    CHECK(q.q05 == doctest::Approx(0.2));
    CHECK(q.q95 == doctest::Approx(3.8));
  }

  TEST_CASE("a five-replicate run writes the expected shape") {
    const auto report = run(small_config());
    CHECK(report.n == 60);
    CHECK(report.half_width == 4);
    CHECK(report.width == 9);
    CHECK(report.functions.size() == 3);
    CHECK(report.cross.size() == 3);
    CHECK(report.samples.size() == 3);
    CHECK(report.samples[0].size() == 5);
    for (const auto& f : report.functions) CHECK_FALSE(f.diagnostics.has_value());
    const auto csv = samples_csv(report);
    CHECK(csv.rfind("replicate,function,re,im\n", 0) == 0);
    std::size_t lines = 0;
    for (char ch : csv) lines += ch == '\n';
    CHECK(lines == 1 + 5 * 3);
    CHECK(csv.find("\"poly:1,0,2\"") != std::string::npos);
    const auto j = nlohmann::json::parse(report_json(report));
    CHECK(j.at("functions").size() == 3);
    CHECK(j.at("spec").at("half_width") == 4);
    CHECK(j.at("execution").at("workers") == 1);
    CHECK(j.at("functions")[1].at("theory").at("value").get<double>() == doctest::Approx(2.0));
    CHECK(report.norms.values.size() == 5);
  }

  TEST_CASE("runs are deterministic and independent of the worker count") {
    auto c = small_config();
    c.replicates = 40;
    const auto a = run(c);
    const auto b = run(c);
    CHECK(samples_csv(a) == samples_csv(b));
    c.workers = 4;
    const auto p = run(c);
    CHECK(samples_csv(a) == samples_csv(p));
    CHECK(without_execution(report_json(a)) == without_execution(report_json(p)));
    c.seed = 4;
    CHECK(samples_csv(run(c)) != samples_csv(a));
  }

  TEST_CASE("invalid configs fail before any work") {
    auto c = small_config();
    c.profile_json = R"({"kind":"piecewise","breaks":[-0.5,0.5],"values":[-1]})";
    CHECK_THROWS_AS(run(c), ConfigError);
    auto d = small_config();
    d.replicates = 1;
    CHECK_THROWS_AS(run(d), ConfigError);
    auto e = small_config();
    e.functions = {"sin"};
    CHECK_THROWS_AS(run(e), ConfigError);
  }

  TEST_CASE("full-band statistics are centred and the cross bound holds") {
    ExperimentConfig c;
    c.n = 101;
    c.bandwidth.kind = BandwidthRule::Kind::Half;
    c.topology = Topology::PeriodicNu;
    c.functions = {"z", "z2", "z3"};
    c.replicates = 300;
    c.seed = 8;
    c.workers = 2;
    c.norm_iters = 0;
    const auto report = run(c);
    CHECK(report.nu == doctest::Approx(1.0));
    for (const auto& f : report.functions) {
      CAPTURE(f.function);
      CHECK(std::abs(f.mean) < 4 * std::sqrt(f.variance / 300.0));
      REQUIRE(f.theory.has_value());
      REQUIRE(f.z_score.has_value());
      CHECK(std::abs(*f.z_score) < 4.0);
      CHECK(f.diagnostics.has_value());
    }
    for (const auto& x : report.cross) {
      CHECK(std::abs(x.covariance) < x.bound);
      REQUIRE(x.theory.has_value());
      CHECK(std::abs(*x.theory) < 1e-12);
    }
    CHECK(report.norms.values.empty());
  }

  TEST_CASE("theory routing") {
    ExperimentConfig c;
    const auto z3 = theory_for(c, TestFunction::parse("z3"));
    REQUIRE(z3.has_value());
    CHECK(z3->method == VarianceMethod::ClosedForm);
    CHECK(z3->value.real() == doctest::Approx(2.25).epsilon(1e-14));
    const auto poly = theory_for(c, TestFunction::parse("poly:0,1,1"));
    REQUIRE(poly.has_value());
    CHECK(poly->value.real() == doctest::Approx(3.0).epsilon(1e-14));
    const auto e = theory_for(c, TestFunction::parse("exp"));
    REQUIRE(e.has_value());
    CHECK(e->method == VarianceMethod::ContourQuadrature);
    const auto near = TestFunction::analytic([](cplx z) { return 1.0 / (1.1 - z); }, 1.1, "pole");
    CHECK_FALSE(theory_for(c, near).has_value());
  }

  TEST_CASE("worker resolution") {
    auto c = small_config();
    c.workers = 3;
    CHECK(resolve_workers(c) == 3);
    c.replicates = 2;
    CHECK(resolve_workers(c) == 2);
  }
}
