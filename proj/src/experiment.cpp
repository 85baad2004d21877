#include "bandclt/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "bandclt/errors.hpp"
#include "bandclt/les.hpp"

namespace bandclt {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

struct ReplicateResult {
  std::vector<cplx> values;
  double norm = 0.0;
};

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

FunctionSummary summarize(const std::string& name, const std::vector<cplx>& xs) {
  const double N = static_cast<double>(xs.size());
  cplx mean{};
  for (const cplx& x : xs) mean += x;
  mean /= N;
  double m2 = 0.0, m4 = 0.0;
  cplx pseudo{};
  for (const cplx& x : xs) {
    const cplx d = x - mean;
    const double a = std::norm(d);
    m2 += a;
    m4 += a * a;
    pseudo += d * d;
  }
  FunctionSummary s{};
  s.function = name;
  s.mean = mean;
  s.variance = m2 / (N - 1.0);
  s.pseudo_variance = pseudo / (N - 1.0);
  s.kurtosis = m2 > 0.0 ? (m4 / N) / ((m2 / N) * (m2 / N)) : 0.0;
  std::vector<double> re, im;
  for (const cplx& x : xs) {
    re.push_back(x.real());
    im.push_back(x.imag());
  }
  s.re = quantiles(re);
  s.im = quantiles(im);
  if (xs.size() >= 50) {
    try {
      s.diagnostics = normality_diagnostics(xs);
    } catch (const DomainError&) {
      // degenerate sample (e.g. constant function): no diagnostics
    }
  }
  return s;
}

ordered_json cplx_json(cplx v) { return {{"re", v.real()}, {"im", v.imag()}}; }

ordered_json optional_number(const std::optional<double>& v) {
  if (v && std::isfinite(*v)) return *v;
  return nullptr;
}

ordered_json quantiles_json(const Quantiles& q) {
  return {{"0.05", q.q05}, {"0.25", q.q25}, {"0.5", q.q50}, {"0.75", q.q75}, {"0.95", q.q95}};
}

std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

NormalityDiagnostics normality_diagnostics(std::span<const cplx> samples) {
  if (samples.size() < 50) throw DomainError("normality diagnostics need at least 50 samples");
  const double N = static_cast<double>(samples.size());
  double mr = 0, mi = 0;
  for (const cplx& x : samples) {
    mr += x.real();
    mi += x.imag();
  }
  mr /= N;
  mi /= N;
  double r2 = 0, r3 = 0, r4 = 0, i2 = 0, i3 = 0, i4 = 0, ri = 0;
  for (const cplx& x : samples) {
    const double a = x.real() - mr, b = x.imag() - mi;
    r2 += a * a;
    r3 += a * a * a;
    r4 += a * a * a * a;
    i2 += b * b;
    i3 += b * b * b;
    i4 += b * b * b * b;
    ri += a * b;
  }
  r2 /= N, r3 /= N, r4 /= N, i2 /= N, i3 /= N, i4 /= N, ri /= N;
  if (!(r2 > 0.0) || !(i2 > 0.0)) throw DomainError("normality diagnostics need non-zero variance");
  NormalityDiagnostics d;
  d.count = samples.size();
  d.skew_re = r3 / std::pow(r2, 1.5);
  d.skew_im = i3 / std::pow(i2, 1.5);
  d.excess_kurtosis_re = r4 / (r2 * r2) - 3.0;
  d.excess_kurtosis_im = i4 / (i2 * i2) - 3.0;
  d.jarque_bera_re = N / 6.0 * (d.skew_re * d.skew_re + 0.25 * d.excess_kurtosis_re * d.excess_kurtosis_re);
  d.jarque_bera_im = N / 6.0 * (d.skew_im * d.skew_im + 0.25 * d.excess_kurtosis_im * d.excess_kurtosis_im);
  d.cov_re_im = ri * N / (N - 1.0);
  d.corr_re_im = ri / std::sqrt(r2 * i2);
  d.variance_ratio = r2 / i2;
  return d;
}

Quantiles quantiles(std::vector<double> values) {
  if (values.empty()) return {0, 0, 0, 0, 0};
  std::sort(values.begin(), values.end());
  auto q = [&](double p) {
    const double pos = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  return {q(0.05), q(0.25), q(0.5), q(0.75), q(0.95)};
}

unsigned resolve_workers(const ExperimentConfig& config) {
  unsigned w = config.workers != 0 ? config.workers : std::max(1u, std::thread::hardware_concurrency());
  if (const char* cap = std::getenv("BANDCLT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(cap, &end, 10);
    if (end != cap && *end == '\0' && v >= 1) w = std::min<unsigned>(w, static_cast<unsigned>(v));
  }
  return static_cast<unsigned>(std::min<std::size_t>(w, std::max<std::size_t>(config.replicates, 1)));
}

std::optional<TheoryVariance> theory_for(const ExperimentConfig& config, const TestFunction& f) {
  const PeriodizedProfile profile = config.periodized_profile();
  if (const auto* mono = std::get_if<TestFunction::Monomial>(&f.kind()))
    return monomial_variance(profile, mono->power, VarianceMethod::ClosedForm);
  if (f.is_polynomial()) return polynomial_covariance(f, f, profile);
  if (f.radius() <= 1.25) return std::nullopt;
  return limiting_covariance(f, f, KernelParams(profile));
}

ExperimentReport run(const ExperimentConfig& config) {
  config.validate();
  const BandSpec spec = config.spec();
  const auto fs = config.test_functions();
  const std::size_t N = config.replicates;
  const unsigned workers = resolve_workers(config);

  std::vector<ReplicateResult> results(N);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> completed{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::string first_error;

  auto worker = [&] {
    for (;;) {
      if (failed.load()) return;
      const std::size_t r = next.fetch_add(1);
      if (r >= N) return;
      try {
        const BandMatrix m = sample(spec, EntryLaw::ComplexStandardGaussian, config.seed, r);
        ReplicateResult out;
        for (const auto& s : les_delta(m, fs, config.dense_limit)) out.values.push_back(s.value);
        if (config.norm_iters > 0) out.norm = spectral_norm(m, config.norm_iters, config.seed);
        results[r] = std::move(out);
        completed.fetch_add(1);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!failed.exchange(true)) first_error = "replicate " + std::to_string(r) + ": " + e.what();
        return;
      }
    }
  };

  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failed.load()) throw PartialRunError(first_error, completed.load());

  ExperimentReport report;
  report.config = config;
  report.version = kVersionTag;
  report.timestamp = utc_timestamp();
  report.workers_used = workers;
  report.n = spec.n();
  report.half_width = spec.half_width();
  report.width = spec.width();
  report.nu = spec.nu();

  report.samples.assign(fs.size(), std::vector<cplx>(N));
  for (std::size_t r = 0; r < N; ++r)
    for (std::size_t f = 0; f < fs.size(); ++f) report.samples[f][r] = results[r].values[f];

  for (std::size_t f = 0; f < fs.size(); ++f) {
    FunctionSummary s = summarize(fs[f].name(), report.samples[f]);
    s.theory = theory_for(config, fs[f]);
    if (s.theory) {
      const double V = s.theory->value.real();
      const double spread = V * std::sqrt(std::max(s.kurtosis - 1.0, 0.0) / static_cast<double>(N));
      if (V != 0.0 && spread > 0.0) s.z_score = (s.variance - V) / spread;
    }
    report.functions.push_back(std::move(s));
  }

  const PeriodizedProfile profile = config.periodized_profile();
  for (std::size_t a = 0; a < fs.size(); ++a) {
    for (std::size_t b = a + 1; b < fs.size(); ++b) {
      const auto& xa = report.samples[a];
      const auto& xb = report.samples[b];
      const cplx ma = report.functions[a].mean, mb = report.functions[b].mean;
      cplx cov{}, pcov{};
      for (std::size_t r = 0; r < N; ++r) {
        cov += (xa[r] - ma) * std::conj(xb[r] - mb);
        pcov += (xa[r] - ma) * (xb[r] - mb);
      }
      CrossCovariance c;
      c.first = fs[a].name();
      c.second = fs[b].name();
      c.covariance = cov / static_cast<double>(N - 1);
      c.pseudo_covariance = pcov / static_cast<double>(N - 1);
      c.bound = 4.0 * std::sqrt(report.functions[a].variance * report.functions[b].variance / static_cast<double>(N));
      if (fs[a].is_polynomial() && fs[b].is_polynomial())
        c.theory = polynomial_covariance(fs[a], fs[b], profile).value;
      report.cross.push_back(c);
    }
  }

  report.norms.iters = config.norm_iters;
  report.norms.rho_check = config.rho_check;
  if (config.norm_iters > 0) {
    double sum = 0.0;
    for (std::size_t r = 0; r < N; ++r) {
      const double v = results[r].norm;
      report.norms.values.push_back(v);
      report.norms.max = std::max(report.norms.max, v);
      sum += v;
      if (v > config.rho_check) ++report.norms.exceedances;
    }
    report.norms.mean = sum / static_cast<double>(N);
  }
  return report;
}

std::vector<HeatmapRow> heatmap_data(const ExperimentReport& report) {
  std::vector<HeatmapRow> rows;
  const std::size_t N = report.samples.empty() ? 0 : report.samples.front().size();
  for (std::size_t r = 0; r < N; ++r)
    for (std::size_t f = 0; f < report.samples.size(); ++f)
      rows.push_back({r, report.functions[f].function, report.samples[f][r].real(), report.samples[f][r].imag()});
  return rows;
}

std::vector<HeatmapRow> heatmap_data(const ExperimentConfig& config) { return heatmap_data(run(config)); }

std::string samples_csv(const ExperimentReport& report) {
  std::string out = "replicate,function,re,im\n";
  for (const auto& row : heatmap_data(report)) {
    out += std::to_string(row.replicate);
    out += ',';
    // names like poly:1,0,2 contain commas
    out += row.function.find(',') != std::string::npos ? "\"" + row.function + "\"" : row.function;
    out += ',' + csv_number(row.re) + ',' + csv_number(row.im) + '\n';
  }
  return out;
}

std::string report_json(const ExperimentReport& report, int indent) {
  ordered_json j;
  j["version"] = report.version;
  j["seed"] = report.config.seed;
  ordered_json echo = ordered_json::parse(config_to_json(report.config));
  echo.erase("workers");  // results never depend on it; reported under "execution"
  j["config"] = echo;
  j["spec"] = {{"n", report.n},
               {"half_width", report.half_width},
               {"width", report.width},
               {"topology", topology_name(report.config.topology)},
               {"nu", report.nu},
               {"entry_law", "complex-standard-gaussian"}};
  j["replicates"] = report.config.replicates;

  ordered_json fns = ordered_json::array();
  for (const auto& s : report.functions) {
    ordered_json f;
    f["function"] = s.function;
    f["mean"] = cplx_json(s.mean);
    f["variance"] = s.variance;
    f["pseudo_variance"] = cplx_json(s.pseudo_variance);
    f["pseudo_variance_abs"] = std::abs(s.pseudo_variance);
    f["kurtosis"] = s.kurtosis;
    if (s.theory) {
      ordered_json t;
      t["value"] = s.theory->value.real();
      t["value_im"] = s.theory->value.imag();
      t["method"] = method_name(s.theory->method);
      t["trunc_error"] = s.theory->trunc_error;
      t["truncation"] = s.theory->truncation;
      f["theory"] = t;
    } else {
      f["theory"] = nullptr;
    }
    f["z_score"] = optional_number(s.z_score);
    if (s.diagnostics) {
      const auto& d = *s.diagnostics;
      f["diagnostics"] = {{"count", d.count},
                          {"skew_re", d.skew_re},
                          {"skew_im", d.skew_im},
                          {"excess_kurtosis_re", d.excess_kurtosis_re},
                          {"excess_kurtosis_im", d.excess_kurtosis_im},
                          {"jarque_bera_re", d.jarque_bera_re},
                          {"jarque_bera_im", d.jarque_bera_im},
                          {"cov_re_im", d.cov_re_im},
                          {"corr_re_im", d.corr_re_im},
                          {"variance_ratio", d.variance_ratio}};
    } else {
      f["diagnostics"] = nullptr;
    }
    f["quantiles"] = {{"re", quantiles_json(s.re)}, {"im", quantiles_json(s.im)}};
    fns.push_back(f);
  }
  j["functions"] = fns;

  ordered_json cross = ordered_json::array();
  for (const auto& c : report.cross) {
    cross.push_back({{"first", c.first},
                     {"second", c.second},
                     {"covariance", cplx_json(c.covariance)},
                     {"pseudo_covariance", cplx_json(c.pseudo_covariance)},
                     {"theory", c.theory ? cplx_json(*c.theory) : ordered_json(nullptr)},
                     {"bound", c.bound}});
  }
  j["cross_covariances"] = cross;

  j["norms"] = {{"iters", report.norms.iters},
                {"rho_check", report.norms.rho_check},
                {"exceedances", report.norms.exceedances},
                {"max", report.norms.max},
                {"mean", report.norms.mean}};
  // Everything that may legitimately differ between otherwise identical runs.
  j["execution"] = {{"timestamp", report.timestamp},
                     {"workers_requested", report.config.workers},
                     {"workers", report.workers_used}};
  return j.dump(indent);
}

void write_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(static_cast<unsigned long long>(
                       std::chrono::steady_clock::now().time_since_epoch().count()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << contents;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error("short write to '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("cannot rename onto '" + path + "'");
  }
}

void write_outputs(const ExperimentReport& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_atomic((std::filesystem::path(dir) / "samples.csv").string(), samples_csv(report));
  write_atomic((std::filesystem::path(dir) / "report.json").string(), report_json(report));
}

}  // namespace bandclt
