#pragma once

#include "twosel/forms.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace twosel {

struct SolubilityCertificate {
  Int p = 0;  // 0 for the real place
  bool soluble = false;
  // "positive-value", "real-root", "negative-definite", "square", "zero", "hensel-root", "exhausted"
  std::string kind;
  Int x = 0, y = 1;  // witness (x:y)
  int patch = 1;     // 1: (x, 1) with x in Z_p; 2: (1, y) with y in pZ_p
  int precision = 0;  // witness disk x + p^precision Z_p
  int val_f = 0, val_df = 0;
  int depth = 0, depth_bound = 0;

  std::string place() const { return p == 0 ? "real" : p.get_str(); }
};

// Number of distinct real roots of a nonzero polynomial, by a Sturm sequence.
int sturm_real_roots(const PolyQ& g);

bool real_soluble(const BinaryForm& f);
SolubilityCertificate real_certificate(const BinaryForm& f);
SolubilityCertificate qp_soluble(const BinaryForm& f, const Int& p);
// Re-checks a certificate with direct evaluation of f.
bool verify_certificate(const BinaryForm& f, const SolubilityCertificate& c);

// Real place and every p | 2 * 3 * Delta(f).
bool locally_soluble(const BinaryForm& f, std::vector<SolubilityCertificate>* certs = nullptr);

// Exists a point of P^1(Q_p) where every form in the list is a square (zero allowed).
bool qp_simultaneous_squares(const std::vector<BinaryForm>& forms, const Int& p, int depth_bound);

bool has_rational_linear_factor(const BinaryForm& f);

// --- GL2(Z) reduction -------------------------------------------------------

// f(p x + q y, r x + s y)
BinaryForm substitute(const BinaryForm& f, const std::array<Int, 4>& g);

// Covariant positive definite quadratic Q_f = sum |x - alpha_i y|^2 / |f_x(alpha_i, 1)|, as (A, B, C).
std::array<long double, 3> hermite_covariant(const BinaryForm& f);

struct CanonicalForm {
  BinaryForm form;
  std::array<Int, 4> gamma{1, 0, 0, 1};  // form = substitute(input, gamma)
  std::string trace;                    // generator word: S, T, t (inverse of T), R
  int explored = 0;
  int depth_cap = 0;
  bool decided = true;  // false when the cap cut off the search
};

CanonicalForm gl2z_canonical(const BinaryForm& f, int depth_cap = 6);

struct EquivalenceResult {
  bool equivalent = false;
  bool undecided = false;
};

EquivalenceResult gl2z_equivalent(const BinaryForm& f, const BinaryForm& g, int depth_cap = 6);

// --- enumeration -------------------------------------------------------------

struct QuarticClass {
  BinaryForm representative;
  Int I, J;  // 2^4 I and 2^6 J of the curve
  std::string trace;
  std::array<Int, 4> gamma{1, 0, 0, 1};  // representative = substitute(first form found, gamma)
  std::vector<SolubilityCertificate> certificates;
};

struct EnumerationOptions {
  double margin = 1.0;  // multiplies the coefficient bounds
  std::uint64_t max_candidates = 1000000000ULL;
  int depth_cap = 6;
};

struct EnumerationReport {
  std::vector<QuarticClass> classes;
  Int I, J;  // quartic invariants
  long double orbit_constant = 0;  // max of det(Q_f) sqrt|Delta| over real orbits
  i64 bound_a = 0, bound_b = 0, bound_c = 0;
  std::uint64_t candidates = 0;
  int forms_found = 0;     // forms with the right invariants in the box
  int z_classes_all = 0;   // GL2(Z) classes before the solubility and linear factor filters
  int undecided = 0;       // canonicalisations cut off by the cap
};

// Coefficient box for quartics with invariants (I, J).
EnumerationReport enumeration_bounds(const Int& I, const Int& J, const EnumerationOptions& opt = {});
EnumerationReport enumerate_classes(const EllipticCurve& e, const EnumerationOptions& opt = {});

// --- rational equivalence ----------------------------------------------------

// Primitive integral gamma with g = f(gamma) / det(gamma)^2, searched with entry denominators up to `den_bound`.
std::optional<std::array<Int, 4>> q_equivalence(const BinaryForm& f, const BinaryForm& g, const Int& den_bound);

struct QCount {
  int parts = 0;
  std::vector<int> part_of;
  std::string method;  // "exact-if-power-check" or "unresolved"
  Int den_bound = 0;   // bound at which the count was accepted
};

QCount count_q_classes(const std::vector<QuarticClass>& classes, const std::vector<Int>& ladder = {30, 1000, 1000000});

// --- Selmer ------------------------------------------------------------------

struct SelmerOptions {
  EnumerationOptions enumeration;
  bool run_oracle = true;  // when E[2] is rational
};

struct SelmerReport {
  EllipticCurve curve;  // normalised
  Rat height = 0;
  int z_classes = 0;
  int q_classes = 0;
  std::string q_method;
  Int sel2 = 1;
  int torsion2 = 1;  // |E(Q)[2]|
  std::optional<Int> oracle;
  std::vector<std::string> flags;
  EnumerationReport enumeration;
};

bool is_power_of_two(const Int& n);
// Integer roots X of X^3 - 27 I X - 27 J, the model Y^2 = X^3 - 27 I X - 27 J with X = 9x.
std::vector<Int> two_torsion_roots(const EllipticCurve& e);

SelmerReport selmer(const Int& I, const Int& J, const SelmerOptions& opt = {});

// (I, J) of y^2 = (x - e1)(x - e2)(x - e3).
std::pair<Int, Int> two_torsion_invariants(const Int& e1, const Int& e2, const Int& e3);

struct OracleReport {
  Int size = 0;
  std::vector<std::pair<Int, Int>> elements;  // (d1, d2), squarefree
  std::vector<Int> primes;
  bool subgroup = false;
};

OracleReport two_torsion_oracle(const Int& e1, const Int& e2, const Int& e3);

// --- moments -----------------------------------------------------------------

struct MomentsFilter {
  Int mod_I = 1, res_I = 0;
  Int mod_J = 1, res_J = 0;
  bool accepts(const Int& I, const Int& J) const;
};

struct CurveRow {
  Int I, J;
  Rat height = 0;
  int z_classes = 0, q_classes = 0;
  Int sel2 = 1;
  int torsion2 = 1;
  std::optional<Int> oracle;
  std::string flags;  // ';'-separated, empty when clean
};

struct MomentsReport {
  Rat height_bound = 0;
  std::vector<CurveRow> rows;  // ordered by height, then I, then J
  std::vector<std::string> excluded;
  Int count = 0, sum_sel = 0, sum_sel_sq = 0;
  std::vector<Int> cumulative_sel, cumulative_sel_sq;
  double first_moment() const;
  double second_moment() const;
  bool monotone() const;
};

// Normalised curves with H(E) < bound; rows are processed in shard `shard_index` of `shard_count`.
std::vector<EllipticCurve> normalized_curves(const Rat& height_bound, const MomentsFilter& filter = {});
MomentsReport moments_over(const std::vector<EllipticCurve>& curves, const SelmerOptions& opt = {}, int shard_index = 0,
                           int shard_count = 1);
MomentsReport moments_harness(const Rat& height_bound, const MomentsFilter& filter = {}, const SelmerOptions& opt = {},
                              int shard_index = 0, int shard_count = 1);
MomentsReport merge_moments(const std::vector<MomentsReport>& parts);

}  // namespace twosel
