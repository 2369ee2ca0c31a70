// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "henonlab/currents.hpp"
#include "henonlab/io.hpp"
#include "henonlab/mapfile.hpp"
#include "henonlab/verify.hpp"

using namespace henonlab;

namespace fs = std::filesystem;

TEST_CASE("fnv1a hash is stable") {
  CHECK(fnv1a64("") == 14695981039346656037ull);
  CHECK(fnv1a64("a") != fnv1a64("b"));
  CHECK(hash_hex(fnv1a64("henonlab")).size() == 16);
}

TEST_CASE("csv writer emits header, comment, rows") {
  auto path = fs::temp_directory_path() / "henonlab_csv_test.csv";
  {
    CsvWriter w(path.string(), "deadbeefdeadbeef", {"a", "b"});
    w.comment("note");
    w.row({format_double(1.5), format_double(-2.0)});
  }
  std::string text = read_file_bytes(path.string());
  CHECK(text == "# henonlab 0.1.0 config=deadbeefdeadbeef\na,b\n# note\n1.5,-2\n");
  fs::remove(path);
}

TEST_CASE("pgm16 layout: header, big-endian samples, clamped range") {
  auto path = fs::temp_directory_path() / "henonlab_pgm_test.pgm";
  std::vector<double> vals{0.0, 0.5, 1.0, 2.0, -1.0, 0.25};
  write_pgm16(path.string(), vals, 3, 2, 0.0, 1.0, "0123456789abcdef");
  std::string bytes = read_file_bytes(path.string());
  CHECK(bytes.rfind("P5\n", 0) == 0);
  auto pos = bytes.find("65535\n");
  REQUIRE(pos != std::string::npos);
  std::size_t data = pos + 6;
  REQUIRE(bytes.size() - data == 12);
  auto sample = [&](int i) {
    return (static_cast<unsigned char>(bytes[data + 2 * i]) << 8) |
           static_cast<unsigned char>(bytes[data + 2 * i + 1]);
  };
  CHECK(sample(0) == 0);
  CHECK(sample(1) == 32768);
  CHECK(sample(2) == 65535);
  CHECK(sample(3) == 65535);  // clamped above
  CHECK(sample(4) == 0);      // clamped below
  CHECK(sample(5) == 16384);
  fs::remove(path);

  CHECK_THROWS_AS(write_pgm16(path.string(), vals, 4, 2, 0, 1, "x"), std::invalid_argument);
}

TEST_CASE("deterministic reductions are thread-count independent") {
  // same chunk grain, different pool sizes: identical bits
  std::vector<double> values(100000);
  for (std::size_t i = 0; i < values.size(); ++i)
    values[i] = std::sin(double(i)) * 1e-3 + 1.0 / double(i + 1);
  auto run = [&](unsigned threads) {
    ThreadPool pool(threads);
    return parallel_map_reduce<double>(
        pool, values.size(), 1024,
        [&](std::size_t b, std::size_t e) {
          std::vector<double> chunk(values.begin() + std::ptrdiff_t(b),
                                    values.begin() + std::ptrdiff_t(e));
          return pairwise_sum(chunk);
        },
        [](double a, double b) { return a + b; });
  };
  double s1 = run(1), s2 = run(2), s4 = run(4);
  CHECK(s1 == s2);
  CHECK(s2 == s4);
}

TEST_CASE("verify checks fail under an insufficient horizon") {
  VerifyOptions opt;
  opt.green_horizon = 2;  // bounded-looking points get G = 0, images do not
  VerifyContext cx(opt);
  CHECK_FALSE(check_functional_equations(cx).pass);

  VerifyOptions ok;
  VerifyContext cy(ok);
  CHECK(check_functional_equations(cy).pass);
}

TEST_CASE("field sampling is thread-count independent") {
  HenonMap map = standard_map();
  GridSpec g;
  g.lo = {-5, -5, -5, -5};
  g.hi = {5, 5, 5, 5};
  g.res = {8, 8, 8, 8};
  ScalarField f1 = sample_field(map, g, Sign::Plus, 6, ThreadPool(1));
  ScalarField f3 = sample_field(map, g, Sign::Plus, 6, ThreadPool(3));
  REQUIRE(f1.values.size() == f3.values.size());
  for (std::size_t i = 0; i < f1.values.size(); ++i) CHECK(f1.values[i] == f3.values[i]);
}
