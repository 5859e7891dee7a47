#include <atomic>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <doctest.h>

#include "areal/error.hpp"
#include "areal/parallel.hpp"
#include "areal/rng.hpp"
#include "areal/stats.hpp"
#include "areal/text.hpp"

using namespace areal;

TEST_CASE("rng streams are reproducible and seed-sensitive") {
  Rng a(42), b(42), c(43);
  bool diverged = false;
  for (int i = 0; i < 100; ++i) {
    const std::uint64_t va = a.next_u64();
    CHECK(va == b.next_u64());
    if (va != c.next_u64()) diverged = true;
  }
  CHECK(diverged);
}

TEST_CASE("derive_seed separates streams and is stable") {
  CHECK(derive_seed(42, 0) == derive_seed(42, 0));
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 64; ++s) seen.insert(derive_seed(42, s));
  CHECK(seen.size() == 64);
  CHECK(derive_seed(42, 1) != derive_seed(43, 1));
}

TEST_CASE("uniform01 stays in [0, 1)") {
  Rng rng(7);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("uniform_int covers its range inclusively and is unbiased enough") {
  Rng rng(11);
  std::vector<int> counts(6, 0);
  for (int i = 0; i < 60000; ++i) {
    const std::int64_t v = rng.uniform_int(0, 5);
    REQUIRE(v >= 0);
    REQUIRE(v <= 5);
    ++counts[static_cast<std::size_t>(v)];
  }
  for (const int c : counts) {
    CHECK(c > 9000);  // each bucket near 10000
    CHECK(c < 11000);
  }
  CHECK_THROWS_AS(rng.uniform_int(3, 2), NumericError);
}

TEST_CASE("normal draws match the target moments loosely") {
  Rng rng(13);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double v = rng.normal();
    sum += v;
    sq += v * v;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::fabs(mean) < 0.01);
  CHECK(std::fabs(var - 1.0) < 0.02);
}

TEST_CASE("poisson mean tracks lambda") {
  Rng rng(17);
  const double lambda = 3.5;
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += static_cast<double>(rng.poisson(lambda));
  CHECK(std::fabs(sum / n - lambda) < 0.05);
  CHECK(rng.poisson(0.0) == 0);
  CHECK_THROWS_AS(rng.poisson(-1.0), NumericError);
}

TEST_CASE("shuffle is a seeded permutation") {
  std::vector<int> v(20);
  for (int i = 0; i < 20; ++i) v[static_cast<std::size_t>(i)] = i;
  std::vector<int> w = v;
  Rng a(5), b(5);
  a.shuffle(v);
  b.shuffle(w);
  CHECK(v == w);
  std::set<int> s(v.begin(), v.end());
  CHECK(s.size() == 20);
}

TEST_CASE("parallel_for covers every index once for any thread count") {
  for (const int threads : {1, 2, 8}) {
    std::vector<std::atomic<int>> hits(101);
    parallel_for(101, threads, [&](std::size_t i) { hits[i].fetch_add(1); });
    for (const auto& h : hits) CHECK(h.load() == 1);
  }
}

TEST_CASE("parallel_for rethrows the smallest failing index") {
  for (const int threads : {1, 4}) {
    try {
      parallel_for(64, threads, [&](std::size_t i) {
        if (i == 9 || i == 40) {
          throw ValidationError("boom at " + fmt_int(static_cast<std::int64_t>(i)));
        }
      });
      FAIL("expected a throw");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()) == "boom at 9");
    }
  }
}

TEST_CASE("fmt_double round-trips exactly through parse") {
  Rng rng(23);
  for (int i = 0; i < 1000; ++i) {
    const double v = (rng.uniform01() - 0.5) * std::pow(10.0, rng.uniform(-12, 12));
    double back = 0.0;
    REQUIRE(try_parse_double(fmt_double(v), back));
    CHECK(back == v);
  }
  CHECK(fmt_double(1.0) == "1");
  CHECK(fmt_double(0.5) == "0.5");
}

TEST_CASE("strict parses reject trailing garbage") {
  double d = 0.0;
  std::int64_t n = 0;
  CHECK(try_parse_double("3.25", d));
  CHECK(d == 3.25);
  CHECK_FALSE(try_parse_double("3.25x", d));
  CHECK_FALSE(try_parse_double("", d));
  CHECK(try_parse_int("-12", n));
  CHECK(n == -12);
  CHECK_FALSE(try_parse_int("12.5", n));
}

TEST_CASE("fnv1a64 and hex64 are stable") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);  // published FNV-1a vector
  CHECK(hex64(0xdeadbeefULL) == "00000000deadbeef");
  CHECK(parse_hex64("00000000deadbeef") == 0xdeadbeefULL);
  CHECK_THROWS_AS(parse_hex64("xyz"), ValidationError);
}

TEST_CASE("mean and population std conventions") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  CHECK(mean_of(v) == doctest::Approx(2.5).epsilon(1e-15));
  // Population denominator: sqrt(((1.5)^2+(0.5)^2+(0.5)^2+(1.5)^2)/4).
  CHECK(pop_std(v) == doctest::Approx(std::sqrt(1.25)).epsilon(1e-15));
}

TEST_CASE("average ranks share ties") {
  const std::vector<double> v{10.0, 20.0, 20.0, 30.0};
  const std::vector<double> r = average_ranks(v);
  CHECK(r[0] == 1.0);
  CHECK(r[1] == 2.5);
  CHECK(r[2] == 2.5);
  CHECK(r[3] == 4.0);
}

TEST_CASE("student t CDF matches symmetry and known points") {
  CHECK(student_t_cdf(0.0, 5.0) == doctest::Approx(0.5).epsilon(1e-12));
  const double p = student_t_two_sided_p(2.0, 10.0);
  CHECK(p == doctest::Approx(0.07338803).epsilon(1e-5));  // R: 2*pt(-2, 10)
  CHECK(student_t_two_sided_p(0.0, 3.0) == doctest::Approx(1.0).epsilon(1e-12));
}
