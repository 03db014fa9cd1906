#include "twosel/localstats.hpp"

#include "twosel/specialness.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

namespace twosel {

namespace {

constexpr int kUpper[10][2] = {{0, 0}, {0, 1}, {0, 2}, {0, 3}, {1, 1}, {1, 2}, {1, 3}, {2, 2}, {2, 3}, {3, 3}};

using Upper = std::array<i64, 10>;

int upper_index(int i, int j) {
  if (i > j) std::swap(i, j);
  for (int t = 0; t < 10; ++t)
    if (kUpper[t][0] == i && kUpper[t][1] == j) return t;
  throw Error("bad coefficient index");
}

std::array<i64, 16> full(const Upper& u) {
  std::array<i64, 16> m{};
  for (int t = 0; t < 10; ++t) m[4 * kUpper[t][0] + kUpper[t][1]] = m[4 * kUpper[t][1] + kUpper[t][0]] = u[t];
  return m;
}

MatZ to_matz(const std::array<i64, 16>& m) {
  MatZ out(4, 4);
  for (int t = 0; t < 16; ++t) out(t / 4, t % 4) = static_cast<long>(m[t]);
  return out;
}

void require_prime(i64 p) {
  if (p < 2 || !is_prime(Int(p))) throw Error("p must be prime");
}

i64 checked_pow(i64 p, int e) {
  i64 r = 1;
  for (int i = 0; i < e; ++i) {
    if (r > (i64(1) << 40) / p) throw Error("modulus too large");
    r *= p;
  }
  return r;
}

// Zero together with c l l^T, l normalised to have first nonzero coordinate 1.
std::vector<Upper> rank1_forms(i64 p) {
  std::vector<Upper> out{Upper{}};
  for (int lead = 0; lead < 4; ++lead) {
    i64 tail = 1;
    for (int k = lead + 1; k < 4; ++k) tail *= p;
    for (i64 idx = 0; idx < tail; ++idx) {
      i64 l[4] = {0, 0, 0, 0};
      l[lead] = 1;
      i64 t = idx;
      for (int k = lead + 1; k < 4; ++k) l[k] = t % p, t /= p;
      for (i64 c = 1; c < p; ++c) {
        Upper u;
        for (int s = 0; s < 10; ++s) u[s] = c * l[kUpper[s][0]] % p * l[kUpper[s][1]] % p;
        out.push_back(u);
      }
    }
  }
  return out;
}

// Visits every tuple of U(Z/q) whose first coefficient lies in the shard.
template <class F>
void for_each_form(i64 q, Shard shard, F&& visit) {
  if (shard.count < 1 || shard.index < 0 || shard.index >= shard.count) throw Error("invalid shard");
  Upper u{};
  for (i64 b11 = shard.index; b11 < q; b11 += shard.count) {
    u.fill(0);
    u[0] = b11;
    while (true) {
      visit(u);
      int t = 1;
      while (t < 10 && ++u[t] == q) u[t++] = 0;
      if (t == 10) break;
    }
  }
}

Int shard_total(i64 q, Shard shard) {
  i64 firsts = 0;
  for (i64 b11 = shard.index; b11 < q; b11 += shard.count) ++firsts;
  return Int(static_cast<long>(firsts)) * ipow(Int(static_cast<long>(q)), 9);
}

// B = B0 + p B1 with B0 uniform among rank <= 1 forms mod p and B1 uniform mod q / p.
Upper conditioned_draw(const std::vector<Upper>& base, i64 p, i64 q, std::uint64_t seed, std::uint64_t i) {
  const Upper& b0 = base[counter_rng(seed, 11 * i) % base.size()];
  const i64 lift = q / p;
  Upper u;
  for (int t = 0; t < 10; ++t) u[t] = b0[t] + p * static_cast<i64>(counter_rng(seed, 11 * i + 1 + t) % lift);
  return u;
}

bool band_meets(const Interval& a, double lo, double hi) { return a.hi >= lo && a.lo <= hi; }

void finish(DensityReport& r, bool partial) {
  const double scale = std::pow(static_cast<double>(r.p), -6.0);
  if (r.kind == "rank-strata")
    r.formula = density_formula(r.p, r.a, r.b);
  else
    r.formula = rpow(Rat(r.p), -6 * r.a);
  if (r.mode == "exhaustive") {
    r.density = Rat(r.count, r.total);
    r.density.canonicalize();
    r.estimate = r.density.get_d();
    r.interval = {r.estimate, r.estimate};
  } else {
    const auto hits = r.count.get_ui(), n = r.total.get_ui();
    const double phat = n ? static_cast<double>(hits) / n : 0;
    r.estimate = scale * phat;
    r.std_error = n ? scale * std::sqrt(phat * (1 - phat) / n) : 0;
    Interval w = wilson_interval(hits, n, 3.0);
    r.interval = {scale * w.lo, scale * w.hi};
  }
  if (r.kind == "special") r.envelope = r.estimate / nu_weight(ipow(Int(r.p), r.a)).value();
  if (partial) {
    r.verdict = "partial";
    return;
  }
  const double f = r.formula.get_d();
  if (r.kind == "rank-strata") {
    if (r.mode == "exhaustive")
      r.verdict = r.density == r.formula ? "exact-match" : "mismatch";
    else
      r.verdict = f >= r.interval.lo && f <= r.interval.hi ? "consistent" : "inconsistent";
    return;
  }
  const double lo = f * (1 - 2.0 / r.p), hi = f * (1 + 2.0 / r.p);
  if (r.mode == "exhaustive" && r.a == 1)
    r.verdict = r.count == wedge2_count(r.p) ? "exact-match" : "mismatch";
  else if (r.mode == "exhaustive")
    r.verdict = r.estimate >= lo && r.estimate <= hi ? "within-band" : "outside-band";
  else
    r.verdict = band_meets(r.interval, lo, hi) ? "within-3-sigma" : "outside-3-sigma";
}

bool use_exhaustive(CountMode mode, const Int& total, std::uint64_t limit) {
  const bool fits = total <= Int(static_cast<unsigned long>(limit));
  if (mode == CountMode::Exhaustive && !fits) throw Error("exhaustive enumeration exceeds the configured limit");
  return mode == CountMode::Exhaustive || (mode == CountMode::Auto && fits);
}

}  // namespace

std::uint64_t counter_rng(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t z = seed * 0xD1B54A32D192ED03ULL + (counter + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Interval wilson_interval(std::uint64_t hits, std::uint64_t n, double z) {
  if (n == 0) return {0, 1};
  const double ph = static_cast<double>(hits) / n, z2 = z * z;
  const double denom = 1 + z2 / n;
  const double centre = (ph + z2 / (2 * n)) / denom;
  const double half = z * std::sqrt(ph * (1 - ph) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

Rat density_formula(i64 p, int a, int b) {
  require_prime(p);
  if (a < 1 || b < a) throw Error("density formula needs b >= a >= 1");
  const Rat P(p);
  Rat base = rpow(P, -3 * a - 3 * b);
  if (b == a) return base;
  Rat extra = rpow(P, -2 - 4 * a) / (1 - rpow(P, -7)) * (1 - rpow(P, -3)) * (1 - rpow(P, 7 * a - 7 * b));
  return base * (1 + extra);
}

DensityReport count_rank_strata(i64 p, int a, int b, CountMode mode, const SampleSpec& sample, Shard shard,
                                std::uint64_t limit) {
  require_prime(p);
  if (a < 1 || b < a) throw Error("rank strata need b >= a >= 1");
  const i64 q = checked_pow(p, b);
  DensityReport r;
  r.kind = "rank-strata";
  r.p = p;
  r.a = a;
  r.b = b;
  auto member = [&](const Upper& u) {
    const auto m = full(u);
    if (!rank_le1_mod64(m, p, a)) return false;
    return a == b || rank_le2_mod(to_matz(m), Int(static_cast<long>(q)));
  };
  if (use_exhaustive(mode, ipow(Int(static_cast<long>(q)), 10), limit)) {
    r.mode = "exhaustive";
    std::uint64_t count = 0;
    for_each_form(q, shard, [&](const Upper& u) { count += member(u); });
    r.count = Int(static_cast<unsigned long>(count));
    r.total = shard_total(q, shard);
  } else {
    r.mode = "sample";
    r.seed = sample.seed;
    r.samples = sample.samples;
    const auto base = rank1_forms(p);
    std::uint64_t hits = 0, n = 0;
    for (std::uint64_t i = shard.index; i < sample.samples; i += shard.count, ++n)
      hits += member(conditioned_draw(base, p, q, sample.seed, i));
    r.count = Int(static_cast<unsigned long>(hits));
    r.total = Int(static_cast<unsigned long>(n));
  }
  finish(r, shard.count > 1);
  return r;
}

DensityReport special_density_estimate(i64 p, int k, CountMode mode, const SampleSpec& sample, Shard shard,
                                       std::uint64_t limit) {
  require_prime(p);
  if (k < 1) throw Error("k must be positive");
  const i64 a = checked_pow(p, k);
  if (a > 1024) throw Error("p^k too large for the machine specialness test");
  const i64 q = k == 1 ? p : checked_pow(p, 3 * k);
  DensityReport r;
  r.kind = "special";
  r.p = p;
  r.a = r.b = k;
  auto member = [&](const Upper& u) { return is_special_at64(full(u), a); };
  if (use_exhaustive(mode, ipow(Int(static_cast<long>(q)), 10), limit)) {
    r.mode = "exhaustive";
    std::uint64_t count = 0;
    for_each_form(q, shard, [&](const Upper& u) { count += member(u); });
    r.count = Int(static_cast<unsigned long>(count));
    r.total = shard_total(q, shard);
  } else {
    r.mode = "sample";
    r.seed = sample.seed;
    r.samples = sample.samples;
    const auto base = rank1_forms(p);
    std::uint64_t hits = 0, n = 0;
    for (std::uint64_t i = shard.index; i < sample.samples; i += shard.count, ++n)
      hits += member(conditioned_draw(base, p, q, sample.seed, i));
    r.count = Int(static_cast<unsigned long>(hits));
    r.total = Int(static_cast<unsigned long>(n));
  }
  finish(r, shard.count > 1);
  return r;
}

DensityReport merge_reports(const std::vector<DensityReport>& parts) {
  if (parts.empty()) throw Error("nothing to merge");
  DensityReport r = parts.front();
  r.count = 0;
  r.total = 0;
  for (const auto& x : parts) {
    if (x.kind != r.kind || x.p != r.p || x.a != r.a || x.b != r.b || x.mode != r.mode || x.seed != r.seed)
      throw Error("shard reports describe different runs");
    r.count += x.count;
    r.total += x.total;
  }
  finish(r, false);
  return r;
}

Int wedge2_count(i64 p) {
  require_prime(p);
  // fill order 11,12,22,13,23,33,14,24,34,44; a 2x2 minor is tested once its entries are fixed
  const int order[10][2] = {{0, 0}, {0, 1}, {1, 1}, {0, 2}, {1, 2}, {2, 2}, {0, 3}, {1, 3}, {2, 3}, {3, 3}};
  int depth_of[4][4];
  for (int d = 0; d < 10; ++d) depth_of[order[d][0]][order[d][1]] = depth_of[order[d][1]][order[d][0]] = d;
  struct Minor {
    int i, j, k, l;
  };
  std::vector<Minor> checks[10];
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      for (int k = 0; k < 4; ++k)
        for (int l = k + 1; l < 4; ++l) {
          int d = std::max({depth_of[i][k], depth_of[i][l], depth_of[j][k], depth_of[j][l]});
          checks[d].push_back({i, j, k, l});
        }
  i64 m[4][4] = {};
  std::uint64_t count = 0;
  auto rec = [&](auto&& self, int d) -> void {
    if (d == 10) {
      ++count;
      return;
    }
    const int i = order[d][0], j = order[d][1];
    for (i64 v = 0; v < p; ++v) {
      m[i][j] = m[j][i] = v;
      bool ok = true;
      for (const auto& c : checks[d])
        if ((m[c.i][c.k] * m[c.j][c.l] - m[c.i][c.l] * m[c.j][c.k]) % p != 0) {
          ok = false;
          break;
        }
      if (ok) self(self, d + 1);
    }
  };
  rec(rec, 0);
  return Int(static_cast<unsigned long>(count));
}

double Surd::value() const { return r.get_d() * std::sqrt(s.get_d()); }

Surd nu_weight(const Int& m) {
  if (m <= 0) throw Error("nu is defined on positive integers");
  Surd out;
  for (const auto& [p, k] : factorize(m)) {
    // exponent of p in halves
    long halves = k == 1 ? -12 : k == 2 ? -24 : k == 3 ? -34 : -11L * k;
    if (halves % 2 == 0) {
      out.r *= rpow(Rat(p), halves / 2);
    } else {
      out.r *= rpow(Rat(p), (halves - 1) / 2);
      out.s *= p;
    }
  }
  return out;
}

Rat mu_weight(const Int& a, const Int& b) {
  if (a <= 0 || b <= 0) throw Error("mu needs positive integers");
  Int b1 = 1;
  for (const Int& p : prime_divisors(b))
    if (a % p != 0) b1 *= p;
  return Rat(1) / (Rat(ipow(a, 6)) * Rat(b) * Rat(b1));
}

Cyclotomic::Cyclotomic(i64 p) : p_(p), c_(p, Int(0)) {
  if (p < 2) throw Error("cyclotomic ring needs a prime");
}

Cyclotomic Cyclotomic::zeta_power(i64 p, i64 e) {
  Cyclotomic z(p);
  z.c_[mod64(e, p)] = 1;
  z.normalise();
  return z;
}

Cyclotomic Cyclotomic::integer(i64 p, const Int& n) {
  Cyclotomic z(p);
  z.c_[0] = n;
  return z;
}

void Cyclotomic::normalise() {
  const Int top = c_[p_ - 1];
  if (top == 0) return;
  for (auto& x : c_) x -= top;
}

Cyclotomic Cyclotomic::operator+(const Cyclotomic& o) const {
  if (p_ != o.p_) throw Error("cyclotomic fields differ");
  Cyclotomic r(p_);
  for (i64 i = 0; i < p_; ++i) r.c_[i] = c_[i] + o.c_[i];
  r.normalise();
  return r;
}

Cyclotomic Cyclotomic::operator-(const Cyclotomic& o) const {
  if (p_ != o.p_) throw Error("cyclotomic fields differ");
  Cyclotomic r(p_);
  for (i64 i = 0; i < p_; ++i) r.c_[i] = c_[i] - o.c_[i];
  r.normalise();
  return r;
}

Cyclotomic Cyclotomic::operator*(const Cyclotomic& o) const {
  if (p_ != o.p_) throw Error("cyclotomic fields differ");
  Cyclotomic r(p_);
  for (i64 i = 0; i < p_; ++i) {
    if (c_[i] == 0) continue;
    for (i64 j = 0; j < p_; ++j) r.c_[(i + j) % p_] += c_[i] * o.c_[j];
  }
  r.normalise();
  return r;
}

Cyclotomic Cyclotomic::conj() const {
  Cyclotomic r(p_);
  for (i64 i = 0; i < p_; ++i) r.c_[(p_ - i) % p_] = c_[i];
  r.normalise();
  return r;
}

bool Cyclotomic::is_rational() const {
  for (i64 i = 1; i < p_; ++i)
    if (c_[i] != 0) return false;
  return true;
}

std::complex<double> Cyclotomic::value() const {
  std::complex<double> s = 0;
  for (i64 i = 0; i < p_; ++i)
    s += c_[i].get_d() * std::polar(1.0, 2 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(p_));
  return s;
}

Cyclotomic gauss_sum(i64 alpha, i64 p) {
  require_prime(p);
  if (p == 2) throw Error("Gauss sums need an odd prime");
  Cyclotomic g(p);
  for (i64 b = 0; b < p; ++b) g = g + Cyclotomic::zeta_power(p, mulmod64(alpha, b * b, p));
  return g;
}

namespace {

// Symmetric matrix of chi over F_p: diagonal entries as given, off-diagonal halved.
std::array<i64, 16> chi_matrix(const CharacterVector& chi) {
  const i64 p = chi.p, half = invmod64(2, p);
  std::array<i64, 16> m{};
  for (int t = 0; t < 10; ++t) {
    const int i = kUpper[t][0], j = kUpper[t][1];
    const i64 v = mod64(chi.entries[t], p);
    m[4 * i + j] = m[4 * j + i] = i == j ? v : mulmod64(v, half, p);
  }
  return m;
}

// Congruence diagonalisation over F_p, p odd.
std::array<i64, 4> diagonalise_modp(std::array<i64, 16> m, i64 p) {
  auto at = [&](int i, int j) -> i64& { return m[4 * i + j]; };
  auto add = [&](int i, int j, i64 t) {  // e_i += t e_j
    for (int c = 0; c < 4; ++c) at(i, c) = mod64(at(i, c) + t * at(j, c), p);
    for (int r = 0; r < 4; ++r) at(r, i) = mod64(at(r, i) + t * at(r, j), p);
  };
  auto swap = [&](int i, int j) {
    for (int c = 0; c < 4; ++c) std::swap(at(i, c), at(j, c));
    for (int r = 0; r < 4; ++r) std::swap(at(r, i), at(r, j));
  };
  for (int k = 0; k < 4; ++k) {
    int piv = -1;
    for (int i = k; i < 4 && piv < 0; ++i)
      if (at(i, i) != 0) piv = i;
    if (piv < 0) {
      for (int i = k; i < 4 && piv < 0; ++i)
        for (int j = i + 1; j < 4; ++j)
          if (at(i, j) != 0) {
            add(i, j, 1);
            piv = i;
            break;
          }
    }
    if (piv < 0) break;
    swap(k, piv);
    const i64 inv = invmod64(at(k, k), p);
    for (int j = k + 1; j < 4; ++j) add(j, k, mod64(-mulmod64(at(j, k), inv, p), p));
  }
  return {at(0, 0), at(1, 1), at(2, 2), at(3, 3)};
}

i64 nonresidue(i64 p) {
  for (i64 n = 2; n < p; ++n)
    if (legendre(n, p) == -1) return n;
  throw Error("no nonresidue");
}

}  // namespace

int CharacterVector::rank() const {
  require_prime(p);
  if (p == 2) throw Error("characters need an odd prime");
  auto d = diagonalise_modp(chi_matrix(*this), p);
  return static_cast<int>(std::count_if(d.begin(), d.end(), [](i64 x) { return x != 0; }));
}

i64 CharacterVector::pair(const std::array<i64, 10>& b) const {
  i64 s = 0;
  for (int t = 0; t < 10; ++t) s = mod64(s + mulmod64(mod64(entries[t], p), mod64(b[t], p), p), p);
  return s;
}

CharacterVector CharacterVector::diagonal(i64 p, const std::array<i64, 4>& d) {
  CharacterVector c;
  c.p = p;
  c.entries.fill(0);
  for (int i = 0; i < 4; ++i) c.entries[upper_index(i, i)] = d[i];
  return c;
}

FourierValue fourier_rank1(i64 p, const CharacterVector& chi) {
  require_prime(p);
  if (p == 2) throw Error("Fourier transform needs an odd prime");
  if (chi.p != p) throw Error("character is defined modulo a different prime");
  FourierValue v;
  std::vector<Int> counts(p, Int(0));
  for (const auto& b : rank1_forms(p)) counts[chi.pair(b)] += 1;
  v.direct = Cyclotomic(p);
  for (i64 r = 0; r < p; ++r)
    if (counts[r] != 0) v.direct = v.direct + Cyclotomic::zeta_power(p, r) * Cyclotomic::integer(p, counts[r]);

  v.diagonal = diagonalise_modp(chi_matrix(chi), p);
  const i64 eta = nonresidue(p);
  Cyclotomic g1 = Cyclotomic::integer(p, 1), g2 = g1;
  for (i64 alpha : v.diagonal) {
    g1 = g1 * gauss_sum(alpha, p);
    g2 = g2 * gauss_sum(mulmod64(eta, alpha, p), p);
  }
  // each nonzero c l^2 arises from +-l in one square class; zero arises once per class
  Cyclotomic twice = g1 + g2;
  v.product = Cyclotomic(p);
  std::vector<Int> half(p);
  for (i64 i = 0; i < p; ++i) {
    if (twice.coeffs()[i] % 2 != 0) throw Error("Gauss product is not divisible by 2");
    v.product = v.product + Cyclotomic::zeta_power(p, i) * Cyclotomic::integer(p, twice.coeffs()[i] / 2);
  }
  v.agree = v.direct == v.product;
  if (!v.agree) throw Error("direct sum and Gauss product disagree");
  v.magnitude = std::abs(v.direct.value());
  return v;
}

Int parseval_sum(i64 p) {
  require_prime(p);
  if (p == 2) throw Error("Parseval check needs an odd prime");
  if (std::pow(static_cast<double>(p), 14) > 2e9) throw Error("Parseval sum too large");
  const auto forms = rank1_forms(p);
  std::vector<i64> c(p, 0);
  std::vector<i64> n(p);
  CharacterVector chi;
  chi.p = p;
  for_each_form(p, {}, [&](const Upper& u) {
    chi.entries = u;
    std::fill(n.begin(), n.end(), 0);
    for (const auto& b : forms) ++n[chi.pair(b)];
    for (i64 d = 0; d < p; ++d)
      for (i64 r = 0; r < p; ++r) c[d] += n[r] * n[(r + d) % p];
  });
  // sum_d c_d zeta^{-d}
  Cyclotomic total(p);
  for (i64 d = 0; d < p; ++d) total = total + Cyclotomic::zeta_power(p, -d) * Cyclotomic::integer(p, Int(static_cast<long>(c[d])));
  if (!total.is_rational()) throw Error("Parseval sum is not rational");
  return total.coeffs()[0];
}

const WeightExponents& weight_exponents(SiegelGroup g) {
  static const WeightExponents sl4 = {
      {{1, 1}, {-6, -2, -2}}, {{1, 2}, {-2, -2, -2}}, {{1, 3}, {-2, 0, -2}}, {{1, 4}, {-2, 0, 2}}, {{2, 2}, {2, -2, -2}},
      {{2, 3}, {2, 0, -2}},   {{2, 4}, {2, 0, 2}},    {{3, 3}, {2, 2, -2}},  {{3, 4}, {2, 2, 2}},  {{4, 4}, {2, 2, 6}}};
  static const WeightExponents pso = {
      {{1, 1}, {-2, -2, 0}}, {{1, 2}, {-2, 0, 0}}, {{1, 3}, {0, -2, 0}}, {{1, 4}, {0, 0, 0}}, {{2, 2}, {-2, 2, 0}},
      {{2, 3}, {0, 0, 0}},   {{2, 4}, {0, 2, 0}},  {{3, 3}, {2, -2, 0}}, {{3, 4}, {2, 0, 0}}, {{4, 4}, {2, 2, 0}}};
  return g == SiegelGroup::SL4 ? sl4 : pso;
}

std::map<std::pair<int, int>, Rat> siegel_weights(SiegelGroup g, const SiegelPoint& s) {
  const std::size_t dim = g == SiegelGroup::SL4 ? 3 : 2;
  if (s.s.size() != dim) throw Error("Siegel point has the wrong number of coordinates");
  for (const Rat& x : s.s)
    if (x <= 0) throw Error("Siegel coordinates must be positive");
  std::map<std::pair<int, int>, Rat> out;
  for (const auto& [key, e] : weight_exponents(g)) {
    Rat w = 1;
    for (std::size_t i = 0; i < dim; ++i) w *= rpow(s.s[i], e[i]);
    out[key] = w;
  }
  return out;
}

Rat M_of(const SiegelPoint& sp) {
  if (sp.s.size() != 3) throw Error("M(s) needs (s1, s2, s3)");
  const Rat &s1 = sp.s[0], &s2 = sp.s[1], &s3 = sp.s[2];
  Rat m = 1;
  for (Rat c : {Rat(rpow(s1, 2) * rpow(s2, 2) * rpow(s3, -2)), Rat(rpow(s1, 4) * rpow(s2, 2) * rpow(s3, -4)), Rat(rpow(s1, 6) * rpow(s3, -6))})
    m = std::max(m, c);
  return m;
}

namespace {

struct CaseSpec {
  std::vector<int> zero, nonzero;  // upper-triangle indices
  bool det_one;
};

CaseSpec case_spec(const std::string& id) {
  // indices: 0=11 1=12 2=13 3=14 4=22
  if (id == "1") return {{}, {0}, true};
  if (id == "2") return {{0}, {1}, true};
  if (id == "3") return {{0, 1}, {2, 4}, true};
  if (id == "4") return {{0, 1, 4}, {2}, true};
  if (id == "5") return {{0, 1, 2}, {4}, true};
  if (id == "6") return {{0, 1, 2, 4}, {}, true};
  if (id == "a") return {{}, {0}, false};
  if (id == "b") return {{0}, {1}, false};
  if (id == "c") return {{0, 1}, {}, false};
  throw Error("unknown region case: " + id);
}

i128 det4(const i128 m[16]) {
  auto e = [&](int i, int j) { return m[4 * i + j]; };
  i128 d = 0;
  for (int c = 0; c < 4; ++c) {
    int o[3], k = 0;
    for (int y = 0; y < 4; ++y)
      if (y != c) o[k++] = y;
    i128 minor = e(1, o[0]) * (e(2, o[1]) * e(3, o[2]) - e(2, o[2]) * e(3, o[1])) -
                 e(1, o[1]) * (e(2, o[0]) * e(3, o[2]) - e(2, o[2]) * e(3, o[0])) +
                 e(1, o[2]) * (e(2, o[0]) * e(3, o[1]) - e(2, o[1]) * e(3, o[0]));
    d += (c % 2 ? -1 : 1) * e(0, c) * minor;
  }
  return d;
}

Int to_int(i128 x) {
  const bool neg = x < 0;
  unsigned __int128 u = neg ? -static_cast<unsigned __int128>(x) : static_cast<unsigned __int128>(x);
  Int hi(static_cast<unsigned long>(u >> 64)), lo(static_cast<unsigned long>(static_cast<std::uint64_t>(u)));
  Int r = hi * ipow(Int(2), 64) + lo;
  return neg ? Int(-r) : r;
}

// Integer x in [-E, E] (x != 0 if required) with c2 x^2 + c1 x + c0 == 1.
std::uint64_t count_roots(i128 c0, i128 c1, i128 c2, i64 E, bool nonzero) {
  auto ok = [&](const Int& x) { return abs(x) <= E && (!nonzero || x != 0); };
  if (c2 == 0) {
    if (c1 == 0) return c0 == 1 ? static_cast<std::uint64_t>(2 * E + 1 - (nonzero ? 1 : 0)) : 0;
    const i128 num = 1 - c0;
    if (num % c1 != 0) return 0;
    return ok(to_int(num / c1)) ? 1 : 0;
  }
  const Int A = to_int(c2), B = to_int(c1), C = to_int(c0 - 1);
  const Int D = B * B - 4 * A * C;
  if (D < 0 || !is_square(D)) return 0;
  const Int r = isqrt(D);
  std::uint64_t n = 0;
  for (int sgn : {1, -1}) {
    if (sgn == -1 && r == 0) break;
    Int num = -B + sgn * r, den = 2 * A;
    if (num % den != 0) continue;
    if (ok(Int(num / den))) ++n;
  }
  return n;
}

std::vector<std::array<i64, 10>> residue_set(const Int& a, const Int& b) {
  static std::mutex mu;
  static std::map<std::pair<long, long>, std::vector<std::array<i64, 10>>> cache;
  std::lock_guard<std::mutex> lock(mu);
  const auto key = std::make_pair(a.get_si(), b.get_si());
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  const Int m = a * b;
  if (m > 5) throw Error("residue enumeration supports ab <= 5");
  const i64 q = m.get_si();
  std::vector<std::array<i64, 10>> out;
  for_each_form(q, {}, [&](const Upper& u) {
    const auto f = full(u);
    const MatZ B = to_matz(f);
    if (a > 1 && !rank_le1_mod(B, a)) return;
    if (q > 1 && !rank_le2_mod(B, m)) return;
    out.push_back(u);
  });
  cache[key] = out;
  return out;
}

// #{x in [-E, E] : x == r mod m}
Int residue_count(i64 E, i64 r, i64 m) {
  auto fl = [](i64 x, i64 m) { return x >= 0 ? x / m : -((-x + m - 1) / m); };
  return Int(static_cast<long>(fl(E - r, m) - fl(-E - 1 - r, m)));
}

}  // namespace

RegionReport region_count(const std::string& id, const SiegelPoint& sp, const Rat& Z, const Int& a, const Int& b,
                          const RegionOptions& opt) {
  const CaseSpec spec = case_spec(id);
  if (Z <= 0) throw Error("Z must be positive");
  if (a <= 0 || b <= 0) throw Error("a and b must be positive");
  const auto w = siegel_weights(SiegelGroup::SL4, sp);
  const Rat &s1 = sp.s[0], &s2 = sp.s[1], &s3 = sp.s[2];
  RegionReport r;
  r.case_id = id;

  auto sq = [](const Rat& x) { return x * x; };
  if (id == "1" || id == "a") r.condition_holds = rpow(s1, 6) * sq(s2) * sq(s3) <= Z;
  if (id == "2" || id == "b") r.condition_holds = sq(s1) * sq(s2) * sq(s3) <= Z;
  if (id == "3") r.condition_holds = sq(s1) * sq(s3) <= Z && sq(s2) * sq(s3) <= sq(s1) * Z;
  if (id == "4") r.condition_holds = sq(s1) * sq(s3) <= Z;
  if (id == "5") r.condition_holds = sq(s1) <= sq(s3) * Z && sq(s2) * sq(s3) <= sq(s1) * Z;
  if (id == "6") r.condition_holds = sq(s1) <= sq(s3) * Z && sq(s3) <= sq(s1) * Z;

  auto mono = [&](int e1, int e2, int e3, int ez) { return Rat(rpow(s1, e1) * rpow(s2, e2) * rpow(s3, e3) * rpow(Z, ez)).get_d(); };
  const double M = M_of(sp).get_d(), mu = mu_weight(a, b).get_d();
  if (id == "1") r.bound = mono(-2, 0, -2, 9);
  if (id == "2") r.bound = mono(4, 2, 0, 8);
  if (id == "3") r.bound = mono(6, 4, 2, 7);
  if (id == "4") r.bound = mono(4, 6, 4, 6);
  if (id == "5") r.bound = mono(10, 2, 6, 5);
  if (id == "6") r.bound = mono(8, 6, 8, 4);
  if (id == "a") r.bound = mu * M * mono(-6, 0, 6, 10);
  if (id == "b") r.bound = std::sqrt(a.get_d()) * mu * M * mono(0, 2, 8, 9);
  if (id == "c") r.bound = a.get_d() * mu * M * mono(4, 4, 12, 8);

  i64 E[10];
  bool zero[10] = {}, nonzero[10] = {};
  for (int t : spec.zero) zero[t] = true;
  for (int t : spec.nonzero) nonzero[t] = true;
  for (int t = 0; t < 10; ++t) {
    Rat edge = Z * w.at({kUpper[t][0] + 1, kUpper[t][1] + 1});
    Int e;
    mpz_fdiv_q(e.get_mpz_t(), edge.get_num_mpz_t(), edge.get_den_mpz_t());
    if (e > Int(1L << 40)) throw Error("box edge too large");
    E[t] = zero[t] ? 0 : e.get_si();
  }
  auto finish = [&]() {
    r.ratio = r.bound > 0 ? r.count / r.bound : 0;
    return r;
  };
  for (int t = 0; t < 10; ++t)
    if (nonzero[t] && E[t] == 0) {
      r.method = "structural-empty";
      return finish();
    }

  if (!spec.det_one) {
    r.method = "residue-exact";
    const i64 m = Int(a * b).get_si();
    const auto R = residue_set(a, b);
    r.candidates = R.size();
    Int total = 0;
    for (const auto& res : R) {
      Int prod = 1;
      for (int t = 0; t < 10 && prod != 0; ++t) {
        if (zero[t]) {
          prod *= res[t] % m == 0 ? 1 : 0;
          continue;
        }
        Int n = residue_count(E[t], res[t], m);
        if (nonzero[t] && res[t] % m == 0) n -= 1;
        prod *= n;
      }
      total += prod;
    }
    r.exact_count = total;
    r.count = total.get_d();
    return finish();
  }

  std::vector<int> freec;
  for (int t = 0; t < 10; ++t)
    if (E[t] > 0) freec.push_back(t);
  i128 m[16];
  auto set = [&](int t, i64 v) { m[4 * kUpper[t][0] + kUpper[t][1]] = m[4 * kUpper[t][1] + kUpper[t][0]] = v; };
  // the determinant vanishes identically on this pattern iff it vanishes at random points
  {
    bool identically_zero = true;
    for (int trial = 0; trial < 3 && identically_zero; ++trial) {
      for (auto& x : m) x = 0;
      for (int t : freec) set(t, static_cast<i64>(counter_rng(0xfeed + trial, t) % 2000001) - 1000000);
      if (det4(m) != 0) identically_zero = false;
    }
    if (identically_zero) {
      r.method = "structural-empty";
      return finish();
    }
  }
  int solve = -1;
  for (int t : freec)
    if (kUpper[t][0] == kUpper[t][1] && (solve < 0 || E[t] > E[solve])) solve = t;
  if (solve < 0)
    for (int t : freec)
      if (solve < 0 || E[t] > E[solve]) solve = t;
  std::vector<int> others;
  for (int t : freec)
    if (t != solve) others.push_back(t);
  double cand = 1;
  for (int t : others) cand *= static_cast<double>(2 * E[t] + 1 - (nonzero[t] ? 1 : 0));
  r.candidates = cand > 1.8e19 ? UINT64_MAX : static_cast<std::uint64_t>(cand);

  auto fiber = [&](const i64* vals) {
    for (auto& x : m) x = 0;
    for (std::size_t k = 0; k < others.size(); ++k) set(others[k], vals[k]);
    set(solve, 0);
    const i128 d0 = det4(m);
    set(solve, 1);
    const i128 d1 = det4(m);
    set(solve, -1);
    const i128 dm = det4(m);
    const i128 c1 = (d1 - dm) / 2, c2 = (d1 + dm) / 2 - d0;
    return count_roots(d0, c1, c2, E[solve], nonzero[solve]);
  };
  // value of the k-th allowed entry of coordinate t
  auto nth = [&](int t, i64 k) {
    i64 v = k - E[t];
    if (nonzero[t] && v >= 0) ++v;
    return v;
  };
  std::vector<i64> vals(others.size());
  if (cand <= static_cast<double>(opt.exact_limit)) {
    r.method = "exhaustive";
    std::vector<i64> idx(others.size(), 0);
    std::uint64_t total = 0;
    while (true) {
      for (std::size_t k = 0; k < others.size(); ++k) vals[k] = nth(others[k], idx[k]);
      total += fiber(vals.data());
      std::size_t k = 0;
      while (k < others.size()) {
        const int t = others[k];
        if (++idx[k] < 2 * E[t] + 1 - (nonzero[t] ? 1 : 0)) break;
        idx[k++] = 0;
      }
      if (k == others.size()) break;
    }
    r.exact_count = Int(static_cast<unsigned long>(total));
    r.count = static_cast<double>(total);
    return finish();
  }
  r.method = "sample";
  double sum = 0, sum2 = 0;
  for (std::uint64_t i = 0; i < opt.samples; ++i) {
    for (std::size_t k = 0; k < others.size(); ++k) {
      const int t = others[k];
      const i64 size = 2 * E[t] + 1 - (nonzero[t] ? 1 : 0);
      vals[k] = nth(t, static_cast<i64>(counter_rng(opt.seed, i * 10 + k) % static_cast<std::uint64_t>(size)));
    }
    const double h = static_cast<double>(fiber(vals.data()));
    sum += h;
    sum2 += h * h;
  }
  const double n = static_cast<double>(opt.samples), mean = sum / n;
  r.count = cand * mean;
  r.std_error = cand * std::sqrt(std::max(0.0, sum2 / n - mean * mean) / n);
  return finish();
}

}  // namespace twosel
