#include "doctest.h"
#include "oracles.hpp"
#include "twosel/algebras.hpp"
#include "twosel/specialness.hpp"

#include <random>

using namespace twosel;

namespace {

MatZ diag(std::initializer_list<long> d) {
  MatZ m = MatZ::Zero(d.size(), d.size());
  int i = 0;
  for (long v : d) m(i, i) = v, ++i;
  return m;
}

MatZ random_symmetric(std::mt19937_64& rng, int bound) {
  std::uniform_int_distribution<int> d(-bound, bound);
  MatZ m(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) m(i, j) = m(j, i) = d(rng);
  return m;
}

MatZ random_unimodular(std::mt19937_64& rng, int steps) {
  MatZ g = MatZ::Identity(4, 4);
  std::uniform_int_distribution<int> idx(0, 3), c(-2, 2);
  for (int s = 0; s < steps; ++s) {
    int i = idx(rng), j = idx(rng);
    if (i == j) continue;
    int k = c(rng);
    for (int col = 0; col < 4; ++col) g(i, col) += k * g(j, col);
  }
  return g;
}

MatZ conj(const MatZ& g, const MatZ& B) {
  MatZ gt = g.transpose();
  MatZ out = g * B * gt;
  return out;
}

}  // namespace

TEST_CASE("minor matrices") {
  MatZ B = diag({2, 3, 5, 7});
  CHECK(minor_matrix(B, 1) == B);
  MatZ top = minor_matrix(B, 4);
  CHECK(top.rows() == 1);
  CHECK(top(0, 0) == 210);
  MatZ m2 = minor_matrix(B, 2);
  CHECK(m2.rows() == 6);
  // subsets {0,1},{0,2},{0,3},{1,2},{1,3},{2,3}
  CHECK(m2(0, 0) == 6);
  CHECK(m2(2, 2) == 14);
  CHECK(m2(5, 5) == 35);
  CHECK(m2(0, 1) == 0);
}

TEST_CASE("special at a") {
  for (long p : {2, 3, 5, 7}) CHECK(is_special_at(diag({p, p, p, 1}), p));
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) CHECK(is_special_at(random_symmetric(rng, 9), 1));
  CHECK_FALSE(is_special_at(diag({1, 1, 1, 1}), 2));
  CHECK_THROWS_AS(is_special_at(diag({1, 1, 1, 1}), 0), Error);
}

TEST_CASE("rank <= 1 examples") {
  MatZ sq = MatZ::Zero(4, 4);
  sq(0, 0) = sq(0, 1) = sq(1, 0) = sq(1, 1) = 1;
  CHECK(rank_le1_mod(sq, 3));
  CHECK_FALSE(rank_le1_mod(diag({1, 1, 0, 0}), 3));
  CHECK(rank_le1_mod(diag({2, 0, 0, 0}), 9));
  CHECK_THROWS_AS(rank_le1_mod(sq, 0), Error);
}

TEST_CASE("rank <= 1: direct solve matches brute force over Z/q") {
  for (i64 q : {2, 3, 4, 5, 9}) {
    auto set = oracle::rank1_set(q);
    std::mt19937_64 rng(q);
    std::uniform_int_distribution<i64> d(0, q - 1);
    i64 m[4][4];
    const int samples = q <= 4 ? 0 : 20000;
    if (samples == 0) {
      std::uint64_t total = 1;
      for (int i = 0; i < 10; ++i) total *= q;
      for (std::uint64_t code = 0; code < total; ++code) {
        oracle::decode(code, q, m);
        REQUIRE(rank_le1_mod(oracle::to_matz(m), q) == (set.count(code) > 0));
      }
    } else {
      // half the samples drawn from the set itself
      std::vector<std::uint64_t> members(set.begin(), set.end());
      for (int s = 0; s < samples; ++s) {
        std::uint64_t code;
        if (s % 2) {
          code = members[rng() % members.size()];
        } else {
          for (int i = 0; i < 4; ++i)
            for (int j = i; j < 4; ++j) m[i][j] = m[j][i] = d(rng);
          code = oracle::encode(m, q);
        }
        oracle::decode(code, q, m);
        REQUIRE(rank_le1_mod(oracle::to_matz(m), q) == (set.count(code) > 0));
      }
    }
  }
}

TEST_CASE("Jordan decomposition examples") {
  JordanDecomposition d = jordan_decompose(diag({9, 3, 1, 1}), 3, 6);
  CHECK(d.case_tag == 1);
  CHECK(d.exps == std::array<int, 4>{2, 1, 0, 0});

  MatZ h = MatZ::Zero(4, 4);
  h(0, 1) = h(1, 0) = 1;
  h(2, 2) = h(3, 3) = 1;
  JordanDecomposition e = jordan_decompose(h, 2, 5);
  CHECK(e.case_tag == 2);
  CHECK(e.exps == std::array<int, 4>{0, 0, 0, 0});
  CHECK(e.blocks[0].size == 2);
  // 2 v1 v2 is even for every v mod 8, so the plane has no odd diagonal entry in any basis.
  bool odd_value = false;
  for (int v1 = 0; v1 < 8; ++v1)
    for (int v2 = 0; v2 < 8; ++v2)
      if ((2 * v1 * v2) % 2) odd_value = true;
  CHECK_FALSE(odd_value);
}

TEST_CASE("Jordan decomposition is a valid change of basis") {
  std::mt19937_64 rng(12);
  for (long p : {2, 3, 5}) {
    for (int t = 0; t < 300; ++t) {
      MatZ B = random_symmetric(rng, 40);
      if (t % 3 == 0) B *= Int(p);
      const int N = 7;
      JordanDecomposition d = jordan_decompose(B, p, N);
      const i64 q = ipow64(p, N);
      // transform * B * transform^T == reduced
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
          Int s = 0;
          for (int k = 0; k < 4; ++k)
            for (int l = 0; l < 4; ++l) s += Int(static_cast<long>(d.transform(i, k))) * B(k, l) * Int(static_cast<long>(d.transform(j, l)));
          s %= q;
          if (s < 0) s += q;
          REQUIRE(s == Int(static_cast<long>(d.reduced(i, j))));
        }
      Int tdet = det(from64(d.transform)) % p;
      CHECK(tdet != 0);
      // block diagonal shape with sorted exponents
      int pos = 0;
      for (const auto& blk : d.blocks) {
        for (int i = 0; i < 4; ++i)
          for (int j = 0; j < 4; ++j) {
            bool inside_i = i >= pos && i < pos + blk.size, inside_j = j >= pos && j < pos + blk.size;
            if (inside_i != inside_j) REQUIRE(d.reduced(i, j) == 0);
          }
        if (blk.size == 2) {
          CHECK(p == 2);
          if (blk.exp < N) {
            CHECK(blk.unit[0] % 2 == 0);
            CHECK(blk.unit[3] % 2 == 0);
            CHECK(blk.unit[1] % 2 == 1);
          }
        }
        pos += blk.size;
      }
      for (int i = 0; i + 1 < 4; ++i) CHECK(d.exps[i] >= d.exps[i + 1]);
      if (p != 2) CHECK(d.case_tag == 1);
    }
  }
  // unit determinant at odd p: all exponents zero
  for (int t = 0; t < 100; ++t) {
    MatZ B = random_symmetric(rng, 20);
    if (det(B) % 5 == 0) continue;
    JordanDecomposition d = jordan_decompose(B, 5, 4);
    CHECK(d.case_tag == 1);
    CHECK(d.exps == std::array<int, 4>{0, 0, 0, 0});
  }
}

TEST_CASE("Jordan precision limits") {
  CHECK_THROWS_AS(jordan_decompose(diag({1, 1, 1, 1}), 3, 60), Error);
  JordanDecomposition d = jordan_decompose(diag({27, 0, 1, 1}), 3, 2);
  CHECK(d.degenerate);
  CHECK(d.exps[0] == 2);
}

TEST_CASE("rank <= 2 examples") {
  for (long p : {2, 3, 5}) {
    CHECK(rank_le2_mod(diag({0, 0, 1, 1}), p));
    CHECK_FALSE(rank_le2_mod(diag({1, 1, 1, 0}), p));
  }
  // case 3 shape at p = 2 with b1 >= 1
  MatZ c3 = MatZ::Zero(4, 4);
  c3(0, 0) = 2;
  c3(1, 1) = 4;
  c3(2, 3) = c3(3, 2) = 1;
  CHECK(jordan_decompose(c3, 2, 4).case_tag == 3);
  CHECK(rank_le2_mod(c3, 2));
}

TEST_CASE("rank tests agree with orbit closures over Z/q") {
  struct Ring {
    i64 q, p;
  };
  for (Ring r : {Ring{2, 2}, Ring{4, 2}, Ring{3, 3}}) {
    auto rank2 = oracle::orbit_closure(r.q, r.p, 2);
    auto rank1 = oracle::orbit_closure(r.q, r.p, 1);
    i64 m[4][4];
    long mismatches = 0;
    for (std::uint64_t code = 0; code < rank2.size(); ++code) {
      oracle::decode(code, r.q, m);
      MatZ B = oracle::to_matz(m);
      REQUIRE(rank_le2_mod(B, r.q) == static_cast<bool>(rank2[code]));
      REQUIRE(rank_le1_mod_jordan(B, r.q) == static_cast<bool>(rank1[code]));
      if (rank_le1_mod(B, r.q) != static_cast<bool>(rank1[code])) ++mismatches;
    }
    CHECK(mismatches == 0);
  }
}

TEST_CASE("rank <= 1 implies special, exhaustively over Z/p^2") {
  for (i64 p : {2, 3}) {
    const i64 q = p * p;
    auto set = oracle::rank1_set(q);
    for (std::uint64_t code : set) {
      i64 m[4][4];
      oracle::decode(code, q, m);
      REQUIRE(is_special_at(oracle::to_matz(m), q));
    }
  }
}

TEST_CASE("specialness is invariant under unimodular change of basis and congruence") {
  std::mt19937_64 rng(33);
  for (int t = 0; t < 300; ++t) {
    MatZ B = random_symmetric(rng, 6);
    if (t % 2) {
      B(0, 0) *= 0;
      B *= Int(3);
    }
    for (long a : {2L, 3L, 9L, 6L}) {
      const bool s = is_special_at(B, a);
      CHECK(is_special_at(conj(random_unimodular(rng, 8), B), a) == s);
    }
    MatZ shift = random_symmetric(rng, 3) * Int(8);
    CHECK(is_special_at(B + shift, 2) == is_special_at(B, 2));
  }
}

TEST_CASE("special witness examples") {
  for (long p : {2, 3, 5}) {
    WitnessResult w = special_witness(diag({p, p, p, 1}), p);
    REQUIRE(w.ok);
    CHECK(w.witness.records[0].e1 == 0);
    CHECK(w.witness.records[0].e2 == 0);
    CHECK(w.witness.a1 == 1);
    CHECK(w.witness.a2 == p);
    CHECK(w.witness.a3 == 1);
  }
  WitnessResult one = special_witness(diag({1, 2, 3, 4}), 1);
  REQUIRE(one.ok);
  CHECK(one.witness.a1 == 1);
  CHECK(one.witness.a2 == 1);
  CHECK(one.witness.a3 == 1);
  // p times a rank-one unit form, a = p^2
  for (long p : {3, 5}) {
    MatZ l = MatZ::Zero(4, 4);
    const long v[4] = {1, 2, 0, 1};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) l(i, j) = p * v[i] * v[j];
    REQUIRE(is_special_at(l, p * p));
    WitnessResult w = special_witness(l, p * p);
    REQUIRE(w.ok);
    CHECK(w.witness.records[0].e1 == 0);
    CHECK(w.witness.a2 == p * p);
    CHECK(witness_holds(l, w.witness));
  }
  CHECK_THROWS_AS(special_witness(diag({1, 1, 1, 1}), 2), Error);
  CHECK_FALSE(special_witness_unchecked(diag({1, 1, 1, 1}), 2).ok);
}

TEST_CASE("special iff witness, exhaustively over Z/p for p = 2, 3 and composite a") {
  for (i64 q : {2, 3}) {
    std::uint64_t total = 1;
    for (int i = 0; i < 10; ++i) total *= q;
    i64 m[4][4];
    for (std::uint64_t code = 0; code < total; ++code) {
      oracle::decode(code, q, m);
      MatZ B = oracle::to_matz(m);
      REQUIRE(is_special_at(B, q) == special_witness_unchecked(B, q).ok);
    }
  }
  std::mt19937_64 rng(4);
  for (int t = 0; t < 2000; ++t) {
    MatZ B = random_symmetric(rng, 40);
    if (t % 2) {
      MatZ l = MatZ::Zero(4, 4);
      std::uniform_int_distribution<int> d(-3, 3);
      int v[4] = {d(rng), d(rng), d(rng), d(rng)};
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) l(i, j) = v[i] * v[j];
      B = l * Int(static_cast<long>(1 + rng() % 5)) + B * Int(36);
    }
    for (long a : {6L, 12L, 36L}) REQUIRE(is_special_at(B, a) == special_witness_unchecked(B, a).ok);
  }
}

namespace {

struct Constructed {
  BinaryForm f;
  QuadPair pair;
  int alpha;
};

// 3B not special; A = [[p^c A0, I], [I, Y]] and B block diagonal with valuations (>= alpha + c, >= alpha + c, b3, b4), b3 + b4 = alpha - c.
std::optional<Constructed> construct_nonspecial(std::mt19937_64& rng, long p) {
  std::uniform_int_distribution<int> d(-3, 3), u(1, static_cast<int>(p) - 1);
  const int alpha = 1 + static_cast<int>(rng() % 2);
  const int c = 1 + static_cast<int>(rng() % alpha);
  const int b3 = static_cast<int>(rng() % (alpha - c + 1)), b4 = alpha - c - b3;
  const int b1 = alpha + c + static_cast<int>(rng() % 2), b2 = alpha + c + static_cast<int>(rng() % 2);
  const Int pc = ipow(Int(p), c);
  MatZ A = MatZ::Zero(4, 4);
  A(0, 0) = pc * d(rng);
  A(1, 1) = pc * d(rng);
  A(0, 1) = A(1, 0) = pc * d(rng);
  A(0, 2) = A(2, 0) = A(1, 3) = A(3, 1) = 1;
  A(2, 2) = d(rng);
  A(3, 3) = d(rng);
  A(2, 3) = A(3, 2) = d(rng);
  MatZ B = MatZ::Zero(4, 4);
  B(0, 0) = ipow(Int(p), b1) * u(rng);
  B(1, 1) = ipow(Int(p), b2) * u(rng);
  B(0, 1) = B(1, 0) = ipow(Int(p), std::min(b1, b2)) * d(rng);
  B(2, 2) = ipow(Int(p), b3) * u(rng);
  B(3, 3) = ipow(Int(p), b4) * u(rng);
  QuadPair pr{A, B};
  BinaryForm g = resolvent(pr);
  if (g[0] != 1) return std::nullopt;
  auto f = demonicize(g, ipow(Int(p), alpha));
  if (!f || discriminant(*f) == 0 || !arises_for(*f, pr)) return std::nullopt;
  if (is_special_at(B * Int(3), ipow(Int(p), alpha))) return std::nullopt;
  return Constructed{*f, act_slnpm(random_unimodular(rng, 10), pr), alpha};
}

}  // namespace

TEST_CASE("specialize constructed non-special pairs") {
  std::mt19937_64 rng(77);
  for (long p : {5L, 7L, 11L}) {
    int done = 0;
    for (int t = 0; t < 40000 && done < 25; ++t) {
      auto k = construct_nonspecial(rng, p);
      if (!k) continue;
      ++done;
      REQUIRE(arises_for(k->f, k->pair));
      REQUIRE_FALSE(is_special_at(k->pair.B * Int(3), ipow(Int(p), k->alpha)));
      SpecializeResult r = specialize(k->f, k->pair, p);
      REQUIRE(r.ok);
      CHECK_FALSE(r.already_special);
      CHECK(r.c >= 1);
      CHECK(r.c <= k->alpha);
      CHECK(is_special_at_p(r.pair.B, p, k->alpha));
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
          CHECK(valuation(r.pair.A(i, j), Int(p)) >= 0);
          CHECK(valuation(r.pair.B(i, j), Int(p)) >= 0);
        }
      // resolvent of (A, 3B) is g(x, 3y)
      RationalForm res = resolvent(r.pair);
      BinaryForm g = monicize(k->f);
      for (int i = 0; i <= 4; ++i) CHECK(res.coeffs[i] == Rat(g[i] * ipow(Int(3), i)));
    }
    CHECK(done >= 5);
  }
}

TEST_CASE("specialize on already special pairs and bad input") {
  BinaryForm f({1, 0, 0, 0, -2});
  QuadPair p{antidiagonal(4), MatZ::Zero(4, 4)};
  // x^4 - 2 y^4 from the canonical datum
  QuadPair canon = construct_pair(canonical_datum(f));
  SpecializeResult r = specialize(f, canon, 3);
  CHECK(r.ok);
  CHECK(r.already_special);
  CHECK_THROWS_AS(specialize(f, canon, 2), Error);
  CHECK_FALSE(specialize(f, p, 3).ok);
}

TEST_CASE("machine specialness kernel matches the exact minor test") {
  std::mt19937_64 rng(91);
  for (int t = 0; t < 3000; ++t) {
    const long p = t % 3 == 0 ? 2 : (t % 3 == 1 ? 3 : 5);
    const int k = 1 + static_cast<int>(rng() % 3);
    const long a = static_cast<long>(ipow64(p, k));
    MatZ B = random_symmetric(rng, 30);
    if (t % 2) {
      MatZ l = MatZ::Zero(4, 4);
      std::uniform_int_distribution<int> d(-4, 4);
      int v[4] = {d(rng), d(rng), d(rng), d(rng)};
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) l(i, j) = v[i] * v[j];
      B = l * Int(static_cast<long>(1 + rng() % 4)) + B * Int(a);
    }
    std::array<i64, 16> flat{};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) flat[4 * i + j] = B(i, j).get_si();
    REQUIRE(is_special_at64(flat, a) == is_special_at(B, a));
  }
}
