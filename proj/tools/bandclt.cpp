// bandclt command-line front end: simulate, table, compare, theory, dump.
//
// Exit codes: 0 success, 1 comparison failed (compare only), 2 invalid
// arguments or config, 3 runtime failure.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "bandclt/config.hpp"
#include "bandclt/dump.hpp"
#include "bandclt/errors.hpp"
#include "bandclt/experiment.hpp"
#include "bandclt/theory.hpp"

namespace {

using namespace bandclt;
using nlohmann::json;
using nlohmann::ordered_json;

/// Flags shared by every subcommand that builds an experiment config.
struct ConfigFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicates;
  std::optional<std::size_t> n;
  std::optional<double> exponent;
  bool half = false;
  std::optional<std::size_t> b;
  std::optional<std::string> topology;
  std::optional<std::string> profile;
  std::optional<std::string> functions;
  std::optional<unsigned> workers;
  std::optional<double> nu;
  std::optional<int> norm_iters;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "JSON experiment config");
    app->add_option("--out", out, "output directory (or file for dump)");
    app->add_option("--seed", seed, "64-bit seed");
    app->add_option("--replicates", replicates, "number of Monte Carlo replicates");
    app->add_option("--n", n, "matrix dimension");
    app->add_option("--bandwidth-exponent", exponent, "b = floor(n^e)");
    app->add_flag("--half", half, "b = floor((n-1)/2)");
    app->add_option("--b", b, "explicit half-bandwidth");
    app->add_option("--topology", topology, "periodic-nu | periodic-zero | nonperiodic-zero");
    app->add_option("--profile", profile, "\"uniform\" or a profile JSON object");
    app->add_option("--functions", functions, "comma list, e.g. z,z2,z3");
    app->add_option("--workers", workers, "worker threads (0 = all cores)");
    app->add_option("--nu", nu, "declared nu for periodic-nu");
    app->add_option("--norm-iters", norm_iters, "power-iteration steps (0 disables)");
  }

  ExperimentConfig build() const {
    json j = json::object();
    if (!config.empty()) {
      std::ifstream in(config, std::ios::binary);
      if (!in) throw ConfigError("cannot open config file '" + config + "'");
      std::stringstream ss;
      ss << in.rdbuf();
      try {
        j = json::parse(ss.str());
      } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
      }
      if (!j.is_object()) throw ConfigError("config must be a JSON object");
    }
    if (seed) j["seed"] = *seed;
    if (replicates) j["replicates"] = *replicates;
    if (n) j["n"] = *n;
    const int rules = (exponent ? 1 : 0) + (half ? 1 : 0) + (b ? 1 : 0);
    if (rules > 1) throw ConfigError("--bandwidth-exponent, --half and --b are mutually exclusive");
    if (exponent) j["bandwidth"] = {{"exponent", *exponent}};
    if (half) j["bandwidth"] = {{"half", true}};
    if (b) j["bandwidth"] = {{"b", *b}};
    if (topology) j["topology"] = *topology;
    if (profile) {
      try {
        j["profile"] = json::parse(*profile);
      } catch (const json::exception&) {
        j["profile"] = *profile;
      }
    }
    if (functions) j["functions"] = split_function_list(*functions);
    if (workers) j["workers"] = *workers;
    if (nu) j["nu"] = *nu;
    if (norm_iters) j["norm_iters"] = *norm_iters;
    if (!out.empty()) j["out"] = out;
    return parse_config(j.dump());
  }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TableRow {
  std::string function;
  double mc_variance;
  std::optional<double> theory;
  std::optional<double> z;
};

std::vector<TableRow> rows_from_report(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("corrupt report: ") + e.what());
  }
  if (!j.is_object() || !j.contains("functions") || !j["functions"].is_array())
    throw Error("corrupt report: no functions array");
  if (j["functions"].empty()) throw Error("report contains no functions");
  std::vector<TableRow> rows;
  try {
    for (const auto& f : j["functions"]) {
      TableRow r{f.at("function").get<std::string>(), f.at("variance").get<double>(), std::nullopt, std::nullopt};
      if (f.contains("theory") && f["theory"].is_object()) r.theory = f["theory"].at("value").get<double>();
      if (f.contains("z_score") && f["z_score"].is_number()) r.z = f["z_score"].get<double>();
      rows.push_back(r);
    }
  } catch (const json::exception& e) {
    throw Error(std::string("corrupt report: ") + e.what());
  }
  return rows;
}

ordered_json rows_json(const std::vector<TableRow>& rows) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : rows) {
    arr.push_back({{"function", r.function},
                   {"mc_variance", r.mc_variance},
                   {"theory_variance", r.theory ? ordered_json(*r.theory) : ordered_json(nullptr)},
                   {"z_score", r.z ? ordered_json(*r.z) : ordered_json(nullptr)}});
  }
  return {{"rows", arr}};
}

void print_table(const std::vector<TableRow>& rows) {
  std::printf("%-12s %16s %16s %10s\n", "function", "MC variance", "theory variance", "z-score");
  for (const auto& r : rows) {
    std::printf("%-12s %16.6f ", r.function.c_str(), r.mc_variance);
    if (r.theory) std::printf("%16.6f ", *r.theory);
    else std::printf("%16s ", "-");
    if (r.z) std::printf("%10.3f\n", *r.z);
    else std::printf("%10s\n", "-");
  }
}

/// Report text from --report, or from an inline run of the config flags.
std::string obtain_report(const std::string& report_path, const ConfigFlags& flags, bool write) {
  if (!report_path.empty()) return read_file(report_path);
  const ExperimentConfig cfg = flags.build();
  const ExperimentReport rep = run(cfg);
  if (write) write_outputs(rep, cfg.out);
  return report_json(rep);
}

cplx parse_complex(const std::string& text) {
  std::stringstream ss(text);
  std::string re, im;
  std::getline(ss, re, ',');
  std::getline(ss, im);
  try {
    return {std::stod(re), im.empty() ? 0.0 : std::stod(im)};
  } catch (const std::exception&) {
    throw ConfigError("cannot parse complex number '" + text + "' (use re or re,im)");
  }
}

VarianceMethod parse_method(const std::string& s) {
  if (s == "closed") return VarianceMethod::ClosedForm;
  if (s == "convolution") return VarianceMethod::ConvolutionSeries;
  if (s == "fourier") return VarianceMethod::FourierSeries;
  if (s == "contour") return VarianceMethod::ContourQuadrature;
  throw ConfigError("unknown method '" + s + "' (closed | convolution | fourier | contour)");
}

ordered_json cplx_json(cplx v) { return {{"re", v.real()}, {"im", v.imag()}}; }

struct TheoryFlags {
  std::string quantity;
  std::optional<int> l, m, n;
  std::optional<double> x;
  double nu = 0.0;
  std::string profile = "uniform";
  std::string z = "2", eta = "2";
  std::string fi = "z", fj;
  std::string method = "closed";
  std::optional<long long> K;
  std::optional<double> T;
  std::optional<int> nodes_per_unit;
  double epsilon = 0.25;
  int contour_nodes = 512;
};

template <class T>
T require(const std::optional<T>& v, const char* flag) {
  if (!v) throw ConfigError(std::string("missing required flag ") + flag);
  return *v;
}

ordered_json run_theory(const TheoryFlags& t) {
  ordered_json out;
  out["quantity"] = t.quantity;
  ordered_json params = ordered_json::object();

  auto kernel_params = [&] {
    KernelParams p(PeriodizedProfile(parse_profile(t.profile), t.nu));
    if (t.K) p.series_truncation = *t.K;
    if (t.T) p.integral_truncation = *t.T;
    if (t.nodes_per_unit) p.nodes_per_unit = *t.nodes_per_unit;
    p.validate();
    params["nu"] = t.nu;
    params["profile"] = t.profile;
    return p;
  };

  if (t.quantity == "sinc_integral") {
    const int l = require(t.l, "--l");
    params["l"] = l;
    const Rational exact = sinc_power_integral_exact(l);
    out["params"] = params;
    out["value"] = static_cast<double>(exact);
    out["exact"] = exact.str();
    out["method"] = method_name(VarianceMethod::ClosedForm);
    out["trunc_error"] = 0.0;
  } else if (t.quantity == "eulerian") {
    const int n = require(t.n, "--n"), m = require(t.m, "--m");
    params["n"] = n;
    params["m"] = m;
    out["params"] = params;
    out["value"] = eulerian(n, m);
    out["method"] = "recurrence";
    out["trunc_error"] = 0.0;
  } else if (t.quantity == "irwin_hall") {
    const int m = require(t.m, "--m");
    const double x = require(t.x, "--x");
    params["m"] = m;
    params["x"] = x;
    out["params"] = params;
    out["value"] = irwin_hall_pdf(m, x);
    out["method"] = method_name(VarianceMethod::ClosedForm);
    out["trunc_error"] = 0.0;
  } else if (t.quantity == "monomial_variance") {
    const int l = require(t.l, "--l");
    const auto p = kernel_params();
    params["l"] = l;
    params["method"] = t.method;
    const auto v = monomial_variance(p, l, parse_method(t.method));
    out["params"] = params;
    out["value"] = v.value.real();
    out["method"] = method_name(v.method);
    out["trunc_error"] = v.trunc_error;
    out["truncation"] = v.truncation;
    if (p.profile.base().kind() == ProfileKind::Uniform && t.nu == 0.0)
      out["exact"] = uniform_narrow_variance_exact(l).str();
  } else if (t.quantity == "kernel") {
    const auto p = kernel_params();
    const cplx z = parse_complex(t.z), eta = parse_complex(t.eta);
    params["z"] = cplx_json(z);
    params["eta"] = cplx_json(eta);
    const CovarianceKernel k(p);
    const auto v = k(z, eta);
    out["params"] = params;
    out["value"] = cplx_json(v.value);
    out["method"] = k.method() == KernelMethod::FourierSeries ? "FourierSeries" : "PowerSeries";
    out["trunc_error"] = v.trunc_error;
  } else if (t.quantity == "covariance") {
    const auto p = kernel_params();
    const auto fi = TestFunction::parse(t.fi);
    const auto fj = TestFunction::parse(t.fj.empty() ? t.fi : t.fj);
    params["fi"] = fi.name();
    params["fj"] = fj.name();
    params["epsilon"] = t.epsilon;
    params["nodes"] = t.contour_nodes;
    const ContourOptions opts{t.epsilon, t.contour_nodes};
    const auto v = limiting_covariance(fi, fj, p, opts);
    out["params"] = params;
    out["value"] = cplx_json(v.value);
    out["method"] = method_name(v.method);
    out["trunc_error"] = v.trunc_error;
    out["series_value"] = v.series_value ? cplx_json(*v.series_value) : ordered_json(nullptr);
    out["pseudo_covariance"] = cplx_json(pseudo_covariance(fi, fj, p, opts));
  } else {
    throw ConfigError("unknown quantity '" + t.quantity +
                      "' (kernel | monomial_variance | sinc_integral | irwin_hall | eulerian | covariance)");
  }
  return out;
}

int dispatch(int argc, char** argv) {
  CLI::App app{"Linear eigenvalue statistics of random band matrices"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersionTag);

  bool json_out = false;

  auto* simulate = app.add_subcommand("simulate", "run a Monte Carlo experiment, write report.json and samples.csv");
  ConfigFlags sim_flags;
  sim_flags.attach(simulate);
  simulate->add_flag("--json", json_out, "print the report JSON instead of a table");

  auto* table = app.add_subcommand("table", "print MC variance vs theory from a report (or an inline run)");
  ConfigFlags table_flags;
  table_flags.attach(table);
  std::string table_report;
  table->add_option("--report", table_report, "existing report.json");
  table->add_flag("--json", json_out, "machine-readable output");

  auto* compare = app.add_subcommand("compare", "check |z| < threshold for every function; exit 1 on failure");
  ConfigFlags compare_flags;
  compare_flags.attach(compare);
  std::string compare_report;
  double threshold = 4.0;
  compare->add_option("--report", compare_report, "existing report.json");
  compare->add_option("--threshold", threshold, "z-score acceptance threshold");
  compare->add_flag("--json", json_out, "machine-readable output");

  auto* theory = app.add_subcommand("theory", "closed-form limiting quantities as JSON");
  TheoryFlags tf;
  theory->add_option("quantity", tf.quantity, "kernel | monomial_variance | sinc_integral | irwin_hall | eulerian | covariance")
      ->required();
  theory->add_option("--l", tf.l, "monomial power / sinc exponent");
  theory->add_option("--m", tf.m, "Irwin-Hall order or Eulerian ascent count");
  theory->add_option("--n", tf.n, "Eulerian permutation size");
  theory->add_option("--x", tf.x, "Irwin-Hall argument");
  theory->add_option("--nu", tf.nu, "band fraction nu in [0, 1]");
  theory->add_option("--profile", tf.profile, "\"uniform\" or a profile JSON object");
  theory->add_option("--z", tf.z, "kernel argument z as re or re,im");
  theory->add_option("--eta", tf.eta, "kernel argument eta as re or re,im");
  theory->add_option("--fi", tf.fi, "first test function");
  theory->add_option("--fj", tf.fj, "second test function (defaults to --fi)");
  theory->add_option("--method", tf.method, "closed | convolution | fourier | contour");
  theory->add_option("--K", tf.K, "Fourier series truncation");
  theory->add_option("--T", tf.T, "Fourier integral truncation");
  theory->add_option("--nodes-per-unit", tf.nodes_per_unit, "Gauss-Legendre nodes per unit");
  theory->add_option("--epsilon", tf.epsilon, "contour radius is 1 + epsilon");
  theory->add_option("--contour-nodes", tf.contour_nodes, "trapezoid nodes per contour");
  theory->add_flag("--json", json_out, "compact single-line JSON");

  auto* dump = app.add_subcommand("dump", "sample one matrix and write it in bandmat v1 format");
  ConfigFlags dump_flags;
  dump_flags.attach(dump);
  std::size_t dump_replicate = 0;
  dump->add_option("--replicate", dump_replicate, "replicate index");
  dump->add_flag("--json", json_out, "print the sidecar JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (simulate->parsed()) {
    const ExperimentConfig cfg = sim_flags.build();
    const ExperimentReport rep = run(cfg);
    write_outputs(rep, cfg.out);
    const std::string text = report_json(rep);
    if (json_out) {
      std::cout << text << "\n";
    } else {
      print_table(rows_from_report(text));
      std::printf("wrote %s/report.json and %s/samples.csv\n", cfg.out.c_str(), cfg.out.c_str());
    }
    return 0;
  }

  if (table->parsed()) {
    const auto rows = rows_from_report(obtain_report(table_report, table_flags, false));
    const ordered_json twin = rows_json(rows);
    if (json_out) std::cout << twin.dump(2) << "\n";
    else print_table(rows);
    if (!table_flags.out.empty()) {
      std::filesystem::create_directories(table_flags.out);
      write_atomic((std::filesystem::path(table_flags.out) / "table.json").string(), twin.dump(2) + "\n");
    }
    return 0;
  }

  if (compare->parsed()) {
    const auto rows = rows_from_report(obtain_report(compare_report, compare_flags, false));
    bool ok = true;
    ordered_json results = ordered_json::array();
    for (const auto& r : rows) {
      const bool pass = r.z && std::abs(*r.z) < threshold;
      ok = ok && pass;
      results.push_back({{"function", r.function},
                         {"z_score", r.z ? ordered_json(*r.z) : ordered_json(nullptr)},
                         {"pass", pass}});
      if (!json_out)
        std::printf("%-12s z = %s  %s\n", r.function.c_str(), r.z ? std::to_string(*r.z).c_str() : "n/a",
                    pass ? "PASS" : "FAIL");
    }
    if (json_out) std::cout << ordered_json{{"threshold", threshold}, {"pass", ok}, {"results", results}}.dump(2) << "\n";
    return ok ? 0 : 1;
  }

  if (theory->parsed()) {
    const ordered_json out = run_theory(tf);
    std::cout << (json_out ? out.dump() : out.dump(2)) << "\n";
    return 0;
  }

  if (dump->parsed()) {
    ConfigFlags f = dump_flags;
    const std::string path = f.out.empty() ? "matrix.bandmat" : f.out;
    f.out.clear();
    const ExperimentConfig cfg = f.build();
    const BandMatrix m = sample(cfg.spec(), EntryLaw::ComplexStandardGaussian, cfg.seed, dump_replicate);
    if (const auto parent = std::filesystem::path(path).parent_path(); !parent.empty())
      std::filesystem::create_directories(parent);
    write_bandmat(m, path, cfg.profile_json);
    if (json_out) std::cout << read_file(path + ".json");
    else std::printf("wrote %s (%zu x %zu band) and %s.json\n", path.c_str(), m.n(), m.width(), path.c_str());
    return 0;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const bandclt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const bandclt::DomainError& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
