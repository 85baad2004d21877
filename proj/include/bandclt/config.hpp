#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bandclt/les.hpp"
#include "bandclt/matgen.hpp"
#include "bandclt/profiles.hpp"

namespace bandclt {

/// How the half-bandwidth b was requested.
struct BandwidthRule {
  enum class Kind { Exponent, Half, Explicit };
  Kind kind = Kind::Exponent;
  double exponent = 0.3;   ///< b = floor(n^exponent)
  std::size_t value = 0;   ///< Explicit b

  std::size_t resolve(std::size_t n) const;
};

/// b = floor(n^e). A tiny epsilon guards exact powers against rounding.
std::size_t bandwidth_from_exponent(std::size_t n, double exponent);
/// b = floor((n - 1) / 2), so c = n for odd n and n - 1 for even n.
std::size_t half_bandwidth(std::size_t n);

struct ExperimentConfig {
  std::size_t n = 1000;
  BandwidthRule bandwidth;
  Topology topology = Topology::PeriodicZero;
  /// Declared nu for the periodic-nu topology; defaults to c/n.
  std::optional<double> nu;
  std::string profile_json = R"({"kind":"uniform"})";
  std::vector<std::string> functions{"z"};
  std::size_t replicates = 500;
  std::uint64_t seed = 0;
  unsigned workers = 0;  ///< 0 picks the hardware concurrency
  double rho_check = 3.0;
  int norm_iters = 50;   ///< 0 disables the spectral-norm check
  std::size_t dense_limit = kDefaultDenseLimit;
  std::string out = "results";

  std::size_t half_width() const { return bandwidth.resolve(n); }
  double effective_nu() const;
  VarianceProfile profile() const;
  PeriodizedProfile periodized_profile() const;
  BandSpec spec() const;
  std::vector<TestFunction> test_functions() const;

  /// Throws ConfigError on any inconsistency, before work starts.
  void validate() const;
};

/// Parse a config document (JSON text). Unknown keys are rejected.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
/// Canonical JSON echo of a config; parse_config(config_to_json(c)) == c.
std::string config_to_json(const ExperimentConfig& config, int indent = 2);

/// A profile from "uniform" or a JSON object such as
/// {"kind":"piecewise","breaks":[-0.5,0,0.5],"values":[1,1]}.
VarianceProfile parse_profile(const std::string& text);

/// Splits "z,z2,poly:1,0,2,z3" into function specs, keeping polynomial
/// coefficient lists together.
std::vector<std::string> split_function_list(const std::string& text);

}  // namespace bandclt
