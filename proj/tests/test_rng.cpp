#include "doctest.h"

#include "mghmc/rng.hpp"

#include <cmath>
#include <set>
#include <vector>

using namespace mghmc;

// Reference words from numpy.random.Philox(key=[seed, stream]) with the
// counter preset to 2^256 - 1: numpy increments before generating, so its
// first block is the one at counter 0, as here.
TEST_CASE("Philox4x64-10 known answers") {
  struct Case {
    std::uint64_t seed, stream;
    std::array<std::uint64_t, 6> words;
  };
  const Case cases[] = {
      {0, 0,
       {0x16554d9eca36314cULL, 0xdb20fe9d672d0fdcULL, 0xd7e772cee186176bULL, 0x7e68b68aec7ba23bULL,
        0x02f4ba6408e4d89bULL, 0x3dd62b0b9ca8c5b2ULL}},
      {42, 7,
       {0x2fd1bc0d2c8697bbULL, 0x8ee17f67a549bba6ULL, 0x1bdce1f847e7df47ULL, 0xe123b6bbe4e89f03ULL,
        0xa64064f34e84b9a3ULL, 0xe287959a866a08fdULL}},
      {0xDEADBEEFULL, 123456789,
       {0x43eefb49a598efceULL, 0x8a91437ed4a4bb42ULL, 0xf427dff779b122ceULL, 0x100688a8b3201d81ULL,
        0x8c76bebdd689a067ULL, 0x13afc25394d7767eULL}},
  };
  for (const auto& c : cases) {
    Philox4x64 eng(c.seed, c.stream);
    for (auto w : c.words) CHECK(eng() == w);
  }
}

TEST_CASE("counter carries across words") {
  const Philox4x64::Counter all_ones{~0ULL, ~0ULL, ~0ULL, ~0ULL};
  const Philox4x64::Key key{1, 2};
  CHECK(Philox4x64::block(all_ones, key) != Philox4x64::block({0, 0, 0, 0}, key));
  Philox4x64 eng(1, 2);
  for (int i = 0; i < 4; ++i) eng();
  CHECK(eng.counter() == Philox4x64::Counter{1, 0, 0, 0});
  CHECK(eng.buffered() == 0);
}

TEST_CASE("streams are reproducible and distinct") {
  Rng a(9, 1), b(9, 1), c(9, 2), d(10, 1);
  bool differs_c = false, differs_d = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    CHECK(x == b.uniform());
    differs_c |= x != c.uniform();
    differs_d |= x != d.uniform();
  }
  CHECK(differs_c);
  CHECK(differs_d);

  std::set<std::uint64_t> derived;
  for (std::uint64_t i = 0; i < 1000; ++i) derived.insert(derive_stream(0, i));
  CHECK(derived.size() == 1000);
  CHECK(derive_stream(0, 3) == derive_stream(0, 3));
  CHECK(derive_stream(0, 3) != derive_stream(1, 3));
}

TEST_CASE("uniform and normal moments") {
  Rng rng(123, 0);
  const int n = 400000;
  double su = 0, su2 = 0, sn = 0, sn2 = 0, sn4 = 0;
  double umin = 1, umax = 0, omin = 1;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    const double o = rng.uniform_open();
    const double z = rng.normal();
    su += u;
    su2 += u * u;
    sn += z;
    sn2 += z * z;
    sn4 += z * z * z * z;
    umin = std::min(umin, u);
    umax = std::max(umax, u);
    omin = std::min(omin, o);
    CHECK(o > 0.0);
    CHECK(o < 1.0);
  }
  CHECK(umin >= 0.0);
  CHECK(umax < 1.0);
  // Means within ~5 standard errors.
  CHECK(std::abs(su / n - 0.5) < 5 * std::sqrt(1.0 / 12 / n));
  CHECK(std::abs(su2 / n - 1.0 / 3) < 5 * std::sqrt(4.0 / 45 / n));
  CHECK(std::abs(sn / n) < 5 / std::sqrt(n));
  CHECK(std::abs(sn2 / n - 1.0) < 5 * std::sqrt(2.0 / n));
  CHECK(std::abs(sn4 / n - 3.0) < 5 * std::sqrt(96.0 / n));
}

TEST_CASE("normal pairs are uncorrelated") {
  Rng rng(77, 3);
  const int n = 200000;
  double s = 0;
  for (int i = 0; i < n; ++i) s += rng.normal() * rng.normal();
  CHECK(std::abs(s / n) < 5 / std::sqrt(n));
}
