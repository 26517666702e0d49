#include <doctest.h>

#include "socnav/rng.hpp"

using socnav::Rng;

TEST_CASE("identical seed gives identical sequence") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("known xoshiro256++ stream from splitmix64 seed 0") {
  // Frozen from this implementation; guards any later change to the
  // generator, which would silently break every seeded artifact.
  Rng r(0);
  const std::uint64_t expected[4] = {5987356902031041503ULL, 7051070477665621255ULL,
                                     6633766593972829180ULL, 211316841551650330ULL};
  for (std::uint64_t e : expected) CHECK(r.next_u64() == e);
}

TEST_CASE("uniform stays in [0,1) and differs across seeds") {
  Rng a(1), b(2);
  bool any_diff = false;
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    any_diff = any_diff || u != b.uniform();
  }
  CHECK(any_diff);
}

TEST_CASE("uniform_int covers bounds inclusively") {
  Rng r(7);
  bool saw_lo = false, saw_hi = false;
  for (int i = 0; i < 2000; ++i) {
    const auto v = r.uniform_int(2, 9);
    CHECK(v >= 2);
    CHECK(v <= 9);
    saw_lo = saw_lo || v == 2;
    saw_hi = saw_hi || v == 9;
  }
  CHECK(saw_lo);
  CHECK(saw_hi);
}

TEST_CASE("log_uniform respects range") {
  Rng r(3);
  for (int i = 0; i < 500; ++i) {
    const double v = r.log_uniform(1e-6, 1e-4);
    CHECK(v >= 1e-6);
    CHECK(v <= 1e-4);
  }
  CHECK_THROWS_AS(r.log_uniform(0.0, 1.0), socnav::ConfigError);
}

TEST_CASE("shuffle is a permutation and seed-stable") {
  std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7};
  Rng a(9);
  a.shuffle(v);
  std::vector<int> w{0, 1, 2, 3, 4, 5, 6, 7};
  Rng b(9);
  b.shuffle(w);
  CHECK(v == w);
  std::sort(v.begin(), v.end());
  CHECK(v == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7});
}

TEST_CASE("split produces an independent deterministic stream") {
  Rng a(11), b(11);
  Rng a2 = a.split(), b2 = b.split();
  CHECK(a2.next_u64() == b2.next_u64());
  CHECK(a.next_u64() == b.next_u64());
}
