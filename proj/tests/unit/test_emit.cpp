#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "spikecov/config.hpp"
#include "spikecov/emit.hpp"
#include "spikecov/errors.hpp"
#include "spikecov/law.hpp"
#include "spikecov/model.hpp"

using namespace spikecov;
using nlohmann::json;

TEST_CASE("the float formatter round-trips bitwise") {
  const std::vector<double> vs{0.0,       1.0,    -1.0,   0.1,     1.0 / 3.0,
                               1e300,     1e-300, 2.5,    -0.125,  3.141592653589793,
                               5.0e15 + 1.0/3.0, 1e-17,  123456789.123456789};
  for (double v : vs) {
    const std::string s = format_g17(v);
    const double back = std::strtod(s.c_str(), nullptr);
    CHECK(back == v);
  }
  CHECK(format_g17(2.0) == "2");
  CHECK(format_g17(-0.5) == "-0.5");
}

TEST_CASE("hash and hex formatting") {
  // classic 64-bit FNV-1a vectors
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
  CHECK(hex64(0) == "0000000000000000");
  CHECK(hex64(0xdeadbeefull) == "00000000deadbeef");
}

TEST_CASE("csv metadata header") {
  Meta meta{"spikecov 0.1.0", 42, hex64(fnv1a64("{}"))};
  const std::string h = csv_header(meta);
  CHECK(h.find("# spikecov 0.1.0") == 0);
  CHECK(h.find("# seed 42") != std::string::npos);
  CHECK(h.find("# config " + meta.config_hash) != std::string::npos);
}

TEST_CASE("quantiles file layout") {
  Meta meta{"spikecov 0.1.0", 7, "0123456789abcdef"};
  const std::string got = quantiles_csv(meta, {2.0, 1.5, 1.0});
  const std::string want_tail = "i,gamma\n1,2\n2,1.5\n3,1\n";
  REQUIRE(got.size() > want_tail.size());
  CHECK(got.substr(got.size() - want_tail.size()) == want_tail);
  CHECK(got == quantiles_csv(meta, {2.0, 1.5, 1.0}));  // byte-stable
}

TEST_CASE("density file carries its quadrature mass") {
  Meta meta{"spikecov 0.1.0", 1, "0"};
  DensityCurve curve;
  curve.grid = {1.0, 2.0};
  curve.values = {0.25, 0.5};
  curve.mass = 0.9999999;
  const std::string got = density_csv(meta, curve);
  CHECK(got.find("E,rho\n") != std::string::npos);
  CHECK(got.find("1,0.25\n") != std::string::npos);
  const std::string footer = "# mass " + format_g17(0.9999999) + "\n";
  CHECK(got.substr(got.size() - footer.size()) == footer);
}

TEST_CASE("edge summary is valid json with exact values") {
  auto dims = make_dimensions(256, 64);
  auto spec = make_spectrum({{1.0, 256}});
  auto law = EquivalentLaw::solve(spec, dims);
  Meta meta{"spikecov 0.1.0", 3, "ff"};
  const std::string text = edges_json(meta, law);
  const json j = json::parse(text);
  CHECK(j.at("meta").at("seed") == 3);
  CHECK(j.at("gamma_plus").get<double>() == law.gamma_plus());
  CHECK(j.at("gamma_minus").get<double>() == law.gamma_minus());
  CHECK(j.at("c1").get<double>() == law.c1());
  CHECK(j.at("c2").get<double>() == law.c2());
  CHECK(j.at("m1").get<double>() == law.m1());
}

TEST_CASE("file io round-trips") {
  const std::string path = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") +
                           "/spikecov_emit_test.txt";
  write_file(path, "line\n\xE2\x82\xAC bytes");
  CHECK(read_file(path) == "line\n\xE2\x82\xAC bytes");
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_file(path), Error);
}

TEST_CASE("run configuration parses and hashes") {
  const std::string raw = R"({
    "seed": 9,
    "out": "results",
    "model": {"n": 4, "p": 8,
              "spectrum": {"atoms": [{"value": 2.0, "mult": 3}, {"value": 1.0, "mult": 5}]},
              "spikes": [3.0], "varpi": 0.05, "basis": "identity"},
    "density_grid": 64,
    "quantiles_n": 10
  })";
  const RunConfig cfg = parse_config(raw);
  CHECK(cfg.seed == 9);
  CHECK(cfg.out == "results");
  REQUIRE(cfg.model.has_value());
  CHECK(cfg.model->dims.p == 8);
  CHECK(cfg.model->r() == 1);
  CHECK(cfg.density_grid == 64);
  CHECK(cfg.quantiles_n == 10);
  CHECK(cfg.raw == raw);
}

TEST_CASE("sweep configuration parses") {
  const std::string raw = R"({
    "seed": 1,
    "sweep": {"atoms": [{"value": 1.0, "weight": 0.5}, {"value": 2.0, "weight": 0.5}],
              "gs": [1.5], "alpha": 1.5, "c": 1.0, "varpi": 0.05,
              "distribution": "rademacher", "deloc_offset": 5},
    "n_grid": [16, 24, 32],
    "reps": [8, 8, 8],
    "quantities": ["outlier_location", "edge_sticking"]
  })";
  const RunConfig cfg = parse_config(raw);
  REQUIRE(cfg.sweep.has_value());
  CHECK(cfg.sweep->atoms.size() == 2);
  CHECK(cfg.sweep->gs == std::vector<double>{1.5});
  CHECK(cfg.sweep->distribution == EntryDistribution::rademacher);
  CHECK(cfg.n_grid == std::vector<int>{16, 24, 32});
  CHECK(cfg.reps == std::vector<int>{8, 8, 8});
  REQUIRE(cfg.quantities.size() == 2);
  CHECK(cfg.quantities[0] == Quantity::outlier_location);
}

TEST_CASE("unknown configuration keys are rejected") {
  CHECK_THROWS_AS(parse_config(R"({"seeed": 1})"), SchemaError);
  CHECK_THROWS_AS(parse_config(R"({"sweep": {"atoms": [], "gs": [], "alhpa": 2}})"),
                  SchemaError);
  CHECK_THROWS_AS(parse_config("not json"), SchemaError);
  CHECK_THROWS_AS(parse_config(R"({"n_grid": [16, "x"]})"), SchemaError);
}

TEST_CASE("weight files") {
  CHECK(weights_from_csv("ell\n1.0\n0.5\n2\n") == std::vector<double>{1.0, 0.5, 2.0});
  CHECK_THROWS_AS(weights_from_csv("weights\n1.0\n"), SchemaError);
  CHECK_THROWS_AS(weights_from_csv("ell\nabc\n"), SchemaError);
  CHECK_THROWS_AS(weights_from_csv(""), SchemaError);
}
