#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bandclt/config.hpp"
#include "bandclt/theory.hpp"

namespace bandclt {

#ifndef BANDCLT_VERSION
#define BANDCLT_VERSION "0.1.0"
#endif

inline constexpr const char* kVersionTag = "bandclt " BANDCLT_VERSION;

/// Shape diagnostics of a complex sample. Skewness and excess kurtosis are
/// the moment estimators g1 and g2 of the real and imaginary parts;
/// jarque_bera = N/6 (g1^2 + g2^2/4).
struct NormalityDiagnostics {
  std::size_t count = 0;
  double skew_re = 0, skew_im = 0;
  double excess_kurtosis_re = 0, excess_kurtosis_im = 0;
  double jarque_bera_re = 0, jarque_bera_im = 0;
  double cov_re_im = 0, corr_re_im = 0;
  double variance_ratio = 0;  ///< Var(Re) / Var(Im)
};

/// Needs at least 50 samples and non-zero variance in both parts.
NormalityDiagnostics normality_diagnostics(std::span<const cplx> samples);

struct Quantiles {
  double q05, q25, q50, q75, q95;
};
/// Linear-interpolation quantiles of a real sample.
Quantiles quantiles(std::vector<double> values);

struct FunctionSummary {
  std::string function;
  cplx mean;
  double variance;          ///< (1/(N-1)) sum |X - mean|^2
  cplx pseudo_variance;     ///< (1/(N-1)) sum (X - mean)^2
  double kurtosis;          ///< m4 / m2^2 of |X - mean|
  std::optional<TheoryVariance> theory;
  /// (variance - V) / (V sqrt((kurtosis - 1)/N)); empty without a non-zero theory value.
  std::optional<double> z_score;
  std::optional<NormalityDiagnostics> diagnostics;  ///< empty below 50 samples or for degenerate samples
  Quantiles re, im;
};

struct CrossCovariance {
  std::string first, second;
  cplx covariance;         ///< (1/(N-1)) sum (X - Xbar) conj(Y - Ybar)
  cplx pseudo_covariance;  ///< (1/(N-1)) sum (X - Xbar)(Y - Ybar)
  std::optional<cplx> theory;
  /// 4 sqrt(V_a V_b / N) from the sample variances.
  double bound;
};

struct NormSummary {
  int iters = 0;
  double rho_check = 0;
  std::size_t exceedances = 0;
  double max = 0, mean = 0;
  std::vector<double> values;  ///< per replicate
};

struct ExperimentReport {
  ExperimentConfig config;
  std::string version;
  std::string timestamp;
  unsigned workers_used = 0;
  std::size_t n = 0, half_width = 0, width = 0;
  double nu = 0;
  std::vector<FunctionSummary> functions;
  std::vector<CrossCovariance> cross;
  NormSummary norms;
  /// samples[f][r]: statistic of function f on replicate r.
  std::vector<std::vector<cplx>> samples;
};

/// Workers actually used: config.workers (or the hardware concurrency when
/// 0), capped by BANDCLT_THREADS and by the replicate count.
unsigned resolve_workers(const ExperimentConfig& config);

/// Runs the Monte Carlo experiment. Replicates are distributed over worker
/// threads, stored by replicate index and reduced in index order, so the
/// report does not depend on the worker count.
ExperimentReport run(const ExperimentConfig& config);

/// Theory value for one function under the config's ensemble.
std::optional<TheoryVariance> theory_for(const ExperimentConfig& config, const TestFunction& f);

struct HeatmapRow {
  std::size_t replicate;
  std::string function;
  double re, im;
};
std::vector<HeatmapRow> heatmap_data(const ExperimentReport& report);
std::vector<HeatmapRow> heatmap_data(const ExperimentConfig& config);

/// CSV with header "replicate,function,re,im", one row per replicate per function.
std::string samples_csv(const ExperimentReport& report);
std::string report_json(const ExperimentReport& report, int indent = 2);

/// Writes text to path via a temporary file in the same directory and a rename.
void write_atomic(const std::string& path, const std::string& contents);
/// Writes report.json and samples.csv into dir (created if missing).
void write_outputs(const ExperimentReport& report, const std::string& dir);

}  // namespace bandclt
