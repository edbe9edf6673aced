#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>

#include "doctest.h"
#include "girf/errors.hpp"
#include "girf/io.hpp"
#include "girf/models/measles.hpp"
#include "girf/rng.hpp"

using namespace girf;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "girf_test_io";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("csv quoting") {
  CHECK(csv_quote("plain") == "plain");
  CHECK(csv_quote("a,b") == "\"a,b\"");
  CHECK(csv_quote("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_quote("two\nlines") == "\"two\nlines\"");
  CHECK(csv_quote("") == "");
}

TEST_CASE("csv parsing") {
  const auto t = parse_csv("x,\"y,z\",w\r\n1,\"a \"\"q\"\" b\",\"multi\r\nline\"\r\n2,,3\r\n");
  CHECK(t.header == std::vector<std::string>{"x", "y,z", "w"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][1] == "a \"q\" b");
  CHECK(t.rows[0][2] == "multi\r\nline");
  CHECK(t.rows[1][1].empty());
  CHECK(t.column("w") == 2);
  CHECK_THROWS_AS(t.column("nope"), ConfigError);
  CHECK_THROWS_AS(parse_csv("a,b\n1\n"), ConfigError);
  const auto lf = parse_csv("a\n1\n2");
  CHECK(lf.rows.size() == 2);
}

TEST_CASE("reals round trip bitwise") {
  RngStream rng(4);
  for (int i = 0; i < 2000; ++i) {
    double v = (rng.uniform() - 0.5) * std::pow(10.0, static_cast<int>(rng.uniform() * 600) - 300);
    const double back = parse_real(format_real(v));
    CHECK(std::memcmp(&back, &v, sizeof v) == 0);
  }
  CHECK(format_real(0.1) == "0.10000000000000001");
  CHECK(format_real(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_real(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_real(std::nan("")) == "nan");
  CHECK(std::isnan(parse_real("nan")));
  CHECK(parse_real("-inf") == -std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(parse_real("1.5x"), ConfigError);
}

TEST_CASE("writer emits crlf records") {
  const auto path = scratch("w.csv").string();
  CsvWriter w(path);
  w.row({"a", "b,c"});
  w.row({"1", "2"});
  w.close();
  CHECK(read_text_file(path) == "a,\"b,c\"\r\n1,2\r\n");
}

TEST_CASE("observations round trip") {
  const std::vector<double> times{0.5, 1.0, 1.75};
  ObservationSeries data(2, std::vector<double>{0.1, -2.0 / 3.0, 1e-300, 7.0, std::acos(-1.0), -0.0});
  const auto path = scratch("obs.csv").string();
  write_observations_csv(path, times, data);
  const auto back = read_observations_csv(path, 2);
  CHECK(back.times == times);
  CHECK(back.data.values() == data.values());
  CHECK_THROWS_AS(read_observations_csv(path, 3), ConfigError);
}

TEST_CASE("profile round trip") {
  ProfilePoints p{{6, 6, 7}, {-10.5, -10.25, -9.0}, {0, 1, 0}};
  const auto path = scratch("profile.csv").string();
  write_profile_csv(path, p);
  const auto q = read_profile_csv(path);
  CHECK(q.phi == p.phi);
  CHECK(q.loglik == p.loglik);
  CHECK(q.replicate == p.replicate);
}

TEST_CASE("measles network and cases round trip") {
  const auto net = synthetic_measles_network(3, 7, 1940, 1952);
  const auto cities = scratch("cities.csv").string();
  const auto births = scratch("births.csv").string();
  write_cities_csv(cities, net);
  write_births_csv(births, net);
  const auto back = read_measles_network(cities, births);
  REQUIRE(back.size() == 3);
  CHECK(back.births == net.births);
  CHECK(back.first_birth_year == 1940);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(back.cities[k].population == net.cities[k].population);
    for (std::size_t l = 0; l < 3; ++l) CHECK(back.distances(k, l) == doctest::Approx(net.distances(k, l)));
  }
  const std::vector<double> times{1950 + 1.0 / 26, 1950 + 2.0 / 26};
  ObservationSeries cases(3, std::vector<double>{1, 2, 3, 40, 50, 60});
  const auto cpath = scratch("cases.csv").string();
  write_cases_csv(cpath, net, times, cases);
  const auto c = read_cases_csv(cpath, net);
  CHECK(c.times == times);
  CHECK(c.data.values() == cases.values());
}
