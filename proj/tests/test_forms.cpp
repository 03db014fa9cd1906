#include "doctest.h"
#include "twosel/forms.hpp"

using namespace twosel;

TEST_CASE("invariants of x^4 + y^4") {
  auto inv = invariants(BinaryForm{1, 0, 0, 0, 1});
  CHECK(inv.I == 12);
  CHECK(inv.J == 0);
  CHECK(inv.Delta == 256);
}

TEST_CASE("discriminant of x^4 - 2y^4") { CHECK(discriminant(BinaryForm{1, 0, 0, 0, -2}) == -2048); }

TEST_CASE("monicize and demonicize") {
  BinaryForm f{2, 1, 0, 0, 1};
  BinaryForm g = monicize(f);
  CHECK(g == BinaryForm{1, 1, 0, 0, 8});
  auto back = demonicize(g, 2);
  REQUIRE(back.has_value());
  CHECK(*back == f);
  CHECK_FALSE(demonicize(BinaryForm{1, 1, 1, 0, 0}, 2).has_value());
  CHECK_THROWS_AS(monicize(BinaryForm{0, 1, 0, 0, 1}), Error);
}

TEST_CASE("curve normalization") {
  CHECK(normalize_curve(48, 1728) == EllipticCurve{3, 27});
  CHECK_THROWS_AS(normalize_curve(9, 54), Error);
}

#include <random>

namespace {

BinaryForm random_form(std::mt19937_64& rng, int degree, int bound) {
  std::uniform_int_distribution<int> d(-bound, bound);
  std::vector<Int> c;
  for (int i = 0; i <= degree; ++i) c.emplace_back(d(rng));
  return BinaryForm(c);
}

Moebius random_sl2(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> d(-3, 3);
  Moebius g = Moebius::identity();
  for (int k = 0; k < 4; ++k) {
    int c = d(rng);
    g = g * (k % 2 ? Moebius(1, c, 0, 1) : Moebius(1, 0, c, 1));
  }
  return g;
}

}  // namespace

TEST_CASE("twisted action examples") {
  BinaryForm f{1, 0, 0, 0, 1};
  CHECK(act(Moebius::identity(), f) == to_rational(f));
  RationalForm d = act(Moebius(1, 0, 0, 2), BinaryForm{1, 0, 0, 0, 0});
  CHECK(d == RationalForm{{Rat(1, 4), 0, 0, 0, 0}});
  CHECK(act(Moebius::swap(), BinaryForm{1, 2, 3, 4, 5}) == to_rational(BinaryForm{5, 4, 3, 2, 1}));
  CHECK_THROWS_WITH_AS(act(Moebius(1, 2, 2, 4), f), "non-invertible transformation", Error);
}

TEST_CASE("twisted action composes") {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> d(-4, 4);
  for (int trial = 0; trial < 200; ++trial) {
    BinaryForm f = random_form(rng, 4, 9);
    Moebius g1(d(rng), d(rng), d(rng), d(rng)), g2(d(rng), d(rng), d(rng), d(rng));
    if (g1.det() == 0 || g2.det() == 0) continue;
    CHECK(act(g1 * g2, f) == act(g1, act(g2, f)));
  }
}

TEST_CASE("plain substitution") {
  BinaryForm f{2, -1, 3, 0, 7};
  CHECK(act_substitution(Moebius::identity(), f) == f);
  CHECK(act_substitution(Moebius(1, 0, 1, 1), BinaryForm{1, 0, 0, 0, 0}) == BinaryForm{1, 4, 6, 4, 1});
  CHECK(act_substitution(Moebius::swap(), BinaryForm{0, 1, 0, 0}) == BinaryForm{0, 0, 1, 0});
  CHECK_THROWS_AS(act_substitution(Moebius(2, 0, 0, 1), f), Error);
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    BinaryForm g = random_form(rng, 2 + trial % 5, 6);
    if (g.is_zero()) continue;
    CHECK(discriminant(act_substitution(random_sl2(rng), g)) == discriminant(g));
  }
}

TEST_CASE("invariant examples") {
  auto z = invariants(BinaryForm{0, 0, 0, 0, 0});
  CHECK(z.I == 0);
  CHECK(z.J == 0);
  CHECK(z.Delta == 0);
  auto w = invariants(BinaryForm{0, 1, 0, 1, 0});
  CHECK(w.I == -3);
  CHECK(w.J == 0);
  CHECK(w.Delta == -4);
  CHECK(discriminant(BinaryForm{0, 1, 0, 1, 0}) == -4);
  CHECK(height(12, 0) == Rat(4, 27) * 1728);
}

TEST_CASE("discriminant examples and errors") {
  CHECK(discriminant(BinaryForm{1, 0, 0, 0, 1}) == 256);
  CHECK(discriminant(BinaryForm{1, -1, 0, 0, 0}) == 0);
  CHECK_THROWS_AS(discriminant(BinaryForm{1, 1}), Error);
  // disc(x^n + a y^n) = (-1)^{n(n-1)/2} n^n a^{n-1}
  for (int n = 2; n <= 7; ++n)
    for (int a : {-3, 2, 5}) {
      std::vector<Int> c(n + 1, Int(0));
      c[0] = 1;
      c[n] = a;
      Int expected = ipow(Int(n), n) * ipow(Int(a), n - 1);
      if ((n * (n - 1) / 2) % 2) expected = -expected;
      CHECK(discriminant(BinaryForm(c)) == expected);
    }
}

TEST_CASE("invariants are SL2(Z)-invariant and match the resultant discriminant") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 1000; ++trial) {
    BinaryForm f = random_form(rng, 4, 20);
    auto inv = invariants(f);
    REQUIRE(inv.Delta == Rat(discriminant(f)));
    if (trial % 5 == 0) {
      auto moved = invariants(act_substitution(random_sl2(rng), f));
      CHECK(moved.I == inv.I);
      CHECK(moved.J == inv.J);
    }
  }
}

TEST_CASE("discriminant vanishes exactly for repeated roots") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    BinaryForm f = random_form(rng, 4, 3);
    if (f[0] == 0 || f.is_zero()) continue;
    PolyQ p = f.dehomogenize();
    bool repeated = poly_gcd(p, poly_derivative(p)).size() > 1;
    CHECK((discriminant(f) == 0) == repeated);
  }
}

TEST_CASE("monicize round trip") {
  CHECK(monicize(BinaryForm{1, 1, 0, 0, 1}) == BinaryForm{1, 1, 0, 0, 1});
  CHECK(monicize(BinaryForm{3, 0, 0, 0, 3}) == BinaryForm{1, 0, 0, 0, 81});
  CHECK(demonicize(BinaryForm{1, 2, 3, 4, 5}, 1) == BinaryForm{1, 2, 3, 4, 5});
  CHECK_FALSE(demonicize(BinaryForm{1, 0, 0, 0, 1}, 2).has_value());
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    BinaryForm f = random_form(rng, 2 + trial % 4, 12);
    if (f[0] == 0) continue;
    CHECK(demonicize(monicize(f), f[0]) == f);
  }
}

TEST_CASE("curve normalization examples") {
  CHECK(normalize_curve(3, 27) == EllipticCurve{3, 27});
  CHECK(normalize_curve(0, 27) == EllipticCurve{0, 27});
  CHECK(normalize_curve(1, 1) == EllipticCurve{81, 729});
  CHECK(normalize_curve(3 * 625 * 16, 27 * 15625 * 64) == EllipticCurve{3, 27});
  CHECK(quartic_invariants(EllipticCurve{3, 27}) == std::pair<Int, Int>{48, 1728});
}

TEST_CASE("form text encoding") {
  CHECK(parse_form("[1, 0,-2, 0, 5]") == BinaryForm{1, 0, -2, 0, 5});
  CHECK(format_form(BinaryForm{1, 0, -2, 0, 5}) == "[1,0,-2,0,5]");
  CHECK_THROWS_AS(parse_form("1,2"), Error);
  CHECK_THROWS_AS(parse_form("[1,x]"), Error);
}
