#include "bandclt/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "bandclt/errors.hpp"

namespace bandclt {
namespace {

using nlohmann::json;

const std::set<std::string> kConfigKeys{"n",          "bandwidth", "topology",   "nu",          "profile",
                                        "functions",  "replicates", "seed",      "workers",     "rho_check",
                                        "norm_iters", "dense_limit", "out"};

template <class T>
T get_as(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

std::vector<double> number_list(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) throw ConfigError(std::string("profile needs an array '") + key + "'");
  std::vector<double> out;
  for (const auto& v : j.at(key)) {
    if (!v.is_number()) throw ConfigError(std::string("profile '") + key + "' must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

VarianceProfile profile_from_json(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "uniform") return VarianceProfile::uniform();
    throw ConfigError("unknown profile '" + j.get<std::string>() + "'");
  }
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
    throw ConfigError("profile must be \"uniform\" or an object with a \"kind\"");
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "uniform") return VarianceProfile::uniform();
  if (kind == "piecewise") return VarianceProfile::piecewise(number_list(j, "breaks"), number_list(j, "values"));
  if (kind == "tabulated") return VarianceProfile::tabulated(number_list(j, "grid"));
  throw ConfigError("unknown profile kind '" + kind + "'");
}

json bandwidth_to_json(const BandwidthRule& r) {
  switch (r.kind) {
    case BandwidthRule::Kind::Exponent: return {{"exponent", r.exponent}};
    case BandwidthRule::Kind::Half: return {{"half", true}};
    case BandwidthRule::Kind::Explicit: return {{"b", r.value}};
  }
  return {};
}

BandwidthRule bandwidth_from_json(const json& j) {
  BandwidthRule r;
  if (j.is_number_unsigned()) {
    r.kind = BandwidthRule::Kind::Explicit;
    r.value = j.get<std::size_t>();
    return r;
  }
  if (!j.is_object() || j.size() != 1)
    throw ConfigError("bandwidth must be one of {\"exponent\": e}, {\"half\": true}, {\"b\": k}");
  if (j.contains("exponent")) {
    r.kind = BandwidthRule::Kind::Exponent;
    r.exponent = get_as<double>(j, "exponent");
  } else if (j.contains("half")) {
    if (!get_as<bool>(j, "half")) throw ConfigError("bandwidth {\"half\": false} is meaningless");
    r.kind = BandwidthRule::Kind::Half;
  } else if (j.contains("b")) {
    r.kind = BandwidthRule::Kind::Explicit;
    r.value = get_as<std::size_t>(j, "b");
  } else {
    throw ConfigError("bandwidth must be one of {\"exponent\": e}, {\"half\": true}, {\"b\": k}");
  }
  return r;
}

}  // namespace

std::size_t bandwidth_from_exponent(std::size_t n, double exponent) {
  if (!(exponent >= 0.0 && exponent <= 1.0)) throw ConfigError("bandwidth exponent must lie in [0, 1]");
  return static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(n), exponent) + 1e-9));
}

std::size_t half_bandwidth(std::size_t n) { return n == 0 ? 0 : (n - 1) / 2; }

std::size_t BandwidthRule::resolve(std::size_t n) const {
  switch (kind) {
    case Kind::Exponent: return bandwidth_from_exponent(n, exponent);
    case Kind::Half: return half_bandwidth(n);
    case Kind::Explicit: return value;
  }
  return 0;
}

double ExperimentConfig::effective_nu() const {
  if (topology != Topology::PeriodicNu) return 0.0;
  if (nu) return *nu;
  return static_cast<double>(2 * half_width() + 1) / static_cast<double>(n);
}

VarianceProfile ExperimentConfig::profile() const { return parse_profile(profile_json); }

PeriodizedProfile ExperimentConfig::periodized_profile() const { return PeriodizedProfile(profile(), effective_nu()); }

BandSpec ExperimentConfig::spec() const { return BandSpec(n, half_width(), topology, periodized_profile()); }

std::vector<TestFunction> ExperimentConfig::test_functions() const {
  std::vector<TestFunction> out;
  for (const auto& f : functions) out.push_back(TestFunction::parse(f));
  return out;
}

void ExperimentConfig::validate() const {
  if (n < 4) throw ConfigError("n must be >= 4");
  if (replicates < 2) throw ConfigError("replicates must be >= 2");
  if (functions.empty()) throw ConfigError("at least one test function is required");
  if (nu && topology != Topology::PeriodicNu && *nu != 0.0)
    throw ConfigError(std::string("topology ") + topology_name(topology) + " requires nu = 0");
  if (nu && topology == Topology::PeriodicNu && !(*nu > 0.0 && *nu <= 1.0))
    throw ConfigError("periodic-nu topology needs nu in (0, 1]");
  if (!(rho_check > 0.0)) throw ConfigError("rho_check must be > 0");
  if (norm_iters != 0 && norm_iters < 10) throw ConfigError("norm_iters must be 0 (off) or >= 10");
  if (workers > 1024) throw ConfigError("workers must be <= 1024");
  if (dense_limit < 4) throw ConfigError("dense_limit must be >= 4");
  (void)spec();
  for (const auto& f : test_functions())
    if (!f.is_polynomial() && n > dense_limit)
      throw ConfigError("function '" + f.name() + "' needs the dense spectrum but n = " + std::to_string(n) +
                        " exceeds dense_limit = " + std::to_string(dense_limit) +
                        "; use a polynomial truncation instead");
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!kConfigKeys.count(key)) throw ConfigError("unknown config key '" + key + "'");

  ExperimentConfig c;
  if (j.contains("n")) c.n = get_as<std::size_t>(j, "n");
  if (j.contains("bandwidth")) c.bandwidth = bandwidth_from_json(j.at("bandwidth"));
  if (j.contains("topology")) {
    c.topology = parse_topology(get_as<std::string>(j, "topology"));
  } else if (c.bandwidth.kind == BandwidthRule::Kind::Half) {
    c.topology = Topology::PeriodicNu;
  }
  if (j.contains("nu") && !j.at("nu").is_null()) c.nu = get_as<double>(j, "nu");
  if (j.contains("profile")) {
    (void)profile_from_json(j.at("profile"));
    c.profile_json = j.at("profile").is_string() ? json{{"kind", j.at("profile").get<std::string>()}}.dump()
                                                 : j.at("profile").dump();
  }
  if (j.contains("functions")) {
    const auto& f = j.at("functions");
    if (f.is_string()) {
      c.functions = split_function_list(f.get<std::string>());
    } else {
      c.functions = get_as<std::vector<std::string>>(j, "functions");
    }
  }
  if (j.contains("replicates")) c.replicates = get_as<std::size_t>(j, "replicates");
  if (j.contains("seed")) c.seed = get_as<std::uint64_t>(j, "seed");
  if (j.contains("workers")) c.workers = get_as<unsigned>(j, "workers");
  if (j.contains("rho_check")) c.rho_check = get_as<double>(j, "rho_check");
  if (j.contains("norm_iters")) c.norm_iters = get_as<int>(j, "norm_iters");
  if (j.contains("dense_limit")) c.dense_limit = get_as<std::size_t>(j, "dense_limit");
  if (j.contains("out")) c.out = get_as<std::string>(j, "out");
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& c, int indent) {
  json j;
  j["n"] = c.n;
  j["bandwidth"] = bandwidth_to_json(c.bandwidth);
  j["topology"] = topology_name(c.topology);
  j["nu"] = c.nu ? json(*c.nu) : json(nullptr);
  j["profile"] = json::parse(c.profile_json);
  j["functions"] = c.functions;
  j["replicates"] = c.replicates;
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  j["rho_check"] = c.rho_check;
  j["norm_iters"] = c.norm_iters;
  j["dense_limit"] = c.dense_limit;
  j["out"] = c.out;
  return j.dump(indent);
}

VarianceProfile parse_profile(const std::string& text) {
  std::size_t first = 0;
  while (first < text.size() && std::isspace(static_cast<unsigned char>(text[first]))) ++first;
  if (first < text.size() && text[first] == '{') {
    try {
      return profile_from_json(json::parse(text));
    } catch (const json::exception& e) {
      throw ConfigError(std::string("profile is not valid JSON: ") + e.what());
    }
  }
  return profile_from_json(json(text.substr(first)));
}

std::vector<std::string> split_function_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    item = first == std::string::npos ? std::string() : item.substr(first, item.find_last_not_of(" \t") - first + 1);
    const bool continues_poly = !out.empty() && out.back().rfind("poly:", 0) == 0 && !item.empty() &&
                                (std::isdigit(static_cast<unsigned char>(item[0])) || item[0] == '-' ||
                                 item[0] == '+' || item[0] == '.');
    if (continues_poly) {
      out.back() += "," + item;
    } else if (!item.empty()) {
      out.push_back(item);
    }
  }
  return out;
}

}  // namespace bandclt
