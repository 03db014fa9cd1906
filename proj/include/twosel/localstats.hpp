#pragma once

#include "twosel/arith.hpp"

#include <array>
#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace twosel {

enum class CountMode { Auto, Exhaustive, Sample };

struct SampleSpec {
  std::uint64_t seed = 1;
  std::uint64_t samples = 1000000;
};

// Enumeration splits by the value of the first coefficient: shard i handles b11 == i mod count.
struct Shard {
  int index = 0;
  int count = 1;
};

// splitmix64 keyed by (seed, counter).
std::uint64_t counter_rng(std::uint64_t seed, std::uint64_t counter);

struct Interval {
  double lo = 0, hi = 0;
};

// Wilson score interval for hits out of n at z standard deviations.
Interval wilson_interval(std::uint64_t hits, std::uint64_t n, double z);

struct DensityReport {
  std::string kind;  // "rank-strata" or "special"
  i64 p = 0;
  int a = 0, b = 0;  // for "special", a = b = k
  std::string mode;  // "exhaustive" or "sample"
  std::uint64_t seed = 0, samples = 0;
  Int count = 0, total = 0;  // exhaustive; for samples, hits and draws
  Rat density = 0;           // exhaustive only
  double estimate = 0, std_error = 0;
  Interval interval;
  Rat formula = 0;
  double envelope = 0;  // special only: estimate / nu(p^k)
  std::string verdict;
};

Rat density_formula(i64 p, int a, int b);

// B in U(Z/p^b) with rank <= 1 mod p^a and rank <= 2 mod p^b.
DensityReport count_rank_strata(i64 p, int a, int b, CountMode mode, const SampleSpec& sample = {}, Shard shard = {},
                                std::uint64_t exhaustive_limit = 100000000ULL);

// Density of B special at p^k, modulo p (k = 1) or p^(3k).
DensityReport special_density_estimate(i64 p, int k, CountMode mode, const SampleSpec& sample = {}, Shard shard = {},
                                       std::uint64_t exhaustive_limit = 100000000ULL);

// Adds counts of shard reports of the same run and recomputes derived fields.
DensityReport merge_reports(const std::vector<DensityReport>& parts);

// Exhaustive count of B in U(F_p) with every 2x2 minor zero.
Int wedge2_count(i64 p);

// r * sqrt(s), s squarefree.
struct Surd {
  Rat r = 1;
  Int s = 1;
  double value() const;
};

Surd nu_weight(const Int& m);
Rat mu_weight(const Int& a, const Int& b);

// Z[zeta_p] with coefficients normalised so that the coefficient of zeta^(p-1) is zero.
class Cyclotomic {
 public:
  explicit Cyclotomic(i64 p = 3);
  static Cyclotomic zeta_power(i64 p, i64 e);
  static Cyclotomic integer(i64 p, const Int& n);

  i64 prime() const { return p_; }
  const std::vector<Int>& coeffs() const { return c_; }
  Cyclotomic operator+(const Cyclotomic& o) const;
  Cyclotomic operator-(const Cyclotomic& o) const;
  Cyclotomic operator*(const Cyclotomic& o) const;
  bool operator==(const Cyclotomic& o) const { return p_ == o.p_ && c_ == o.c_; }
  Cyclotomic conj() const;
  bool is_rational() const;  // all coefficients except the constant vanish
  std::complex<double> value() const;

 private:
  void normalise();
  i64 p_;
  std::vector<Int> c_;
};

Cyclotomic gauss_sum(i64 alpha, i64 p);

// Dual coefficients indexed like the upper triangle (11,12,13,14,22,23,24,33,34,44).
struct CharacterVector {
  i64 p = 3;
  std::array<i64, 10> entries{};
  int rank() const;
  // chi(B) = e(sum_{i<=j} entries_ij b_ij / p)
  i64 pair(const std::array<i64, 10>& b) const;
  static CharacterVector diagonal(i64 p, const std::array<i64, 4>& d);
};

struct FourierValue {
  Cyclotomic direct, product;
  std::array<i64, 4> diagonal{};  // the alpha_i used in the product formula
  bool agree = false;
  double magnitude = 0;
};

// Sum of chi over rank <= 1 forms mod p, by direct summation and by the Gauss-sum product.
FourierValue fourier_rank1(i64 p, const CharacterVector& chi);

// Sum over all p^10 characters of |S^(chi)|^2, exactly.
Int parseval_sum(i64 p);

enum class SiegelGroup { SL4, PSO_A };

struct SiegelPoint {
  std::vector<Rat> s;  // (s1, s2, s3) or (s1, s2)
};

using WeightExponents = std::map<std::pair<int, int>, std::array<int, 3>>;
const WeightExponents& weight_exponents(SiegelGroup g);
std::map<std::pair<int, int>, Rat> siegel_weights(SiegelGroup g, const SiegelPoint& s);

Rat M_of(const SiegelPoint& s);

struct RegionOptions {
  std::uint64_t exact_limit = 2000000;  // fibered candidates counted exactly up to this size
  std::uint64_t samples = 200000;
  std::uint64_t seed = 1;
};

struct RegionReport {
  std::string case_id;
  std::string method;  // "exhaustive", "sample", "structural-empty", "residue-exact"
  double count = 0;
  Int exact_count = 0;  // valid unless method == "sample"
  double std_error = 0;
  std::uint64_t candidates = 0;
  double bound = 0;
  double ratio = 0;
  bool condition_holds = true;  // fourth-column condition with implied constant 1
  std::string unipotent = "identity";
};

// Points of the stratum in the box |x_ij| <= Z w_ij(s).
RegionReport region_count(const std::string& case_id, const SiegelPoint& s, const Rat& Z, const Int& a = 1, const Int& b = 1,
                          const RegionOptions& opt = {});

}  // namespace twosel
