#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "bandclt/config.hpp"
#include "bandclt/dump.hpp"
#include "bandclt/errors.hpp"

using namespace bandclt;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "bandclt_io_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("bandwidth rules") {
    CHECK(bandwidth_from_exponent(1000, 0.3) == 7);
    CHECK(bandwidth_from_exponent(1024, 0.5) == 32);
    CHECK(bandwidth_from_exponent(1000, 1.0 / 3.0) == 10);
    CHECK(half_bandwidth(1000) == 499);
    CHECK(half_bandwidth(1001) == 500);
    BandwidthRule r;
    r.kind = BandwidthRule::Kind::Explicit;
    r.value = 12;
    CHECK(r.resolve(1000) == 12);
    r.kind = BandwidthRule::Kind::Half;
    CHECK(r.resolve(1000) == 499);
  }

  TEST_CASE("config parsing and echo round trip") {
    const auto c = parse_config(R"({
      "n": 200, "bandwidth": {"exponent": 0.5}, "topology": "periodic-nu", "nu": 0.25,
      "profile": {"kind": "piecewise", "breaks": [-0.5, -0.25, 0.25, 0.5], "values": [0.5, 1.5, 0.5]},
      "functions": ["z", "z3", "poly:1,0,2"], "replicates": 20, "seed": 9, "workers": 2,
      "rho_check": 2.5, "norm_iters": 0, "dense_limit": 512, "out": "x"})");
    CHECK(c.n == 200);
    CHECK(c.half_width() == 14);
    CHECK(c.topology == Topology::PeriodicNu);
    CHECK(*c.nu == 0.25);
    CHECK(c.effective_nu() == 0.25);
    CHECK(c.functions.size() == 3);
    CHECK(c.seed == 9);
    const auto echo = config_to_json(c);
    CHECK(config_to_json(parse_config(echo)) == echo);

    const auto d = parse_config(R"({"functions": "z,poly:1,0,2,z2", "bandwidth": {"half": true}, "topology": "periodic-nu", "n": 99})");
    CHECK(d.functions == std::vector<std::string>{"z", "poly:1,0,2", "z2"});
    CHECK(d.half_width() == 49);
    CHECK(d.effective_nu() == doctest::Approx(1.0));
    const auto defaults = parse_config("{}");
    CHECK(defaults.half_width() == 7);
    CHECK(config_to_json(parse_config(config_to_json(defaults))) == config_to_json(defaults));
  }

  TEST_CASE("config errors") {
    CHECK_THROWS_AS(parse_config(R"({"n": 100, "bandwith": 3})"), ConfigError);
    CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"n": "many"})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"topology": "circular"})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"profile": {"kind": "gaussian"}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"bandwidth": {"half": false}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"topology": "periodic-zero", "nu": 0.5})"), ConfigError);
    CHECK_THROWS_AS(load_config(scratch("missing.json").string()), ConfigError);
  }

  TEST_CASE("profile parsing") {
    CHECK(parse_profile("uniform")(0.3) == 1.0);
    const auto tab = parse_profile(R"({"kind":"tabulated","grid":[0,1,2,1,0]})");
    CHECK(tab(0.0) == doctest::Approx(2.0));
    CHECK_THROWS_AS(parse_profile(R"({"kind":"piecewise","breaks":[-0.5,0.5]})"), ConfigError);
  }

  TEST_CASE("function list splitting") {
    CHECK(split_function_list("z,z2,poly:1,0,2,z3") == std::vector<std::string>{"z", "z2", "poly:1,0,2", "z3"});
    CHECK(split_function_list("poly:1,-2.5,3e-1") == std::vector<std::string>{"poly:1,-2.5,3e-1"});
    CHECK(split_function_list(" z , exp ") == std::vector<std::string>{"z", "exp"});
  }

  TEST_CASE("bandmat round trip") {
    const BandSpec spec(16, 3, Topology::PeriodicZero, PeriodizedProfile(VarianceProfile::uniform(), 0.0));
    const auto m = sample(spec, EntryLaw::ComplexStandardGaussian, 42, 7);
    const auto bytes = encode_bandmat(m);
    CHECK(bytes.size() == kBandmatHeaderBytes + 16 * 7 * 8);
    CHECK(bytes.compare(0, 12, std::string("bandmat v1\0\0", 12)) == 0);
    const auto f = decode_bandmat(bytes);
    CHECK(f.header.n == 16);
    CHECK(f.header.half_width == 3);
    CHECK(f.header.topology == Topology::PeriodicZero);
    CHECK(f.header.seed == 42);
    CHECK(f.header.replicate == 7);
    REQUIRE(f.bands.size() == m.bands().size());
    for (std::size_t k = 0; k < f.bands.size(); ++k) {
      CHECK(f.bands[k].real() == static_cast<float>(m.bands()[k].real()));
      CHECK(f.bands[k].imag() == static_cast<float>(m.bands()[k].imag()));
    }

    const auto path = scratch("m.bandmat").string();
    write_bandmat(m, path, R"({"kind":"uniform"})");
    const auto g = read_bandmat(path);
    CHECK(g.bands == f.bands);
    std::ifstream side(path + ".json");
    const auto j = nlohmann::json::parse(side);
    CHECK(j.at("n") == 16);
    CHECK(j.at("half_width") == 3);
    CHECK(j.at("topology") == "periodic-zero");
    CHECK(j.at("seed") == 42);
  }

  TEST_CASE("corrupt bandmat files are rejected") {
    const BandSpec spec(8, 1, Topology::NonPeriodicZero, PeriodizedProfile(VarianceProfile::uniform(), 0.0));
    auto bytes = encode_bandmat(sample(spec, EntryLaw::ComplexStandardGaussian, 1, 0));
    CHECK_THROWS_AS(decode_bandmat(bytes.substr(0, bytes.size() - 1)), Error);
    CHECK_THROWS_AS(decode_bandmat(bytes.substr(0, 20)), Error);
    auto bad = bytes;
    bad[0] = 'B';
    CHECK_THROWS_AS(decode_bandmat(bad), Error);
    CHECK_THROWS_AS(read_bandmat(scratch("nope.bandmat").string()), Error);
  }
}
