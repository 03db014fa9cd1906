#pragma once

#include "twosel/forms.hpp"

#include <memory>

namespace twosel {

struct QuadPair;

// K_f = Q[x]/(f(x,1)) with power basis 1, theta, ..., theta^(n-1).
class Algebra {
 public:
  explicit Algebra(BinaryForm f);
  static std::shared_ptr<const Algebra> make(const BinaryForm& f);

  const BinaryForm& form() const { return f_; }
  int degree() const { return n_; }

  VecQ mul(const VecQ& x, const VecQ& y) const;
  MatQ mult_matrix(const VecQ& x) const;  // row i = coords of x * theta^i
  Rat norm(const VecQ& x) const;
  VecQ inverse(const VecQ& x) const;
  VecQ theta_power(int k) const;
  VecQ unit() const { return theta_power(0); }
  const VecQ& zeta(int i) const { return zetas_.at(i - 1); }
  // Rows 1, zeta_1, ..., zeta_(n-1) in power-basis coordinates.
  const MatQ& zeta_matrix() const { return zeta_matrix_; }

 private:
  BinaryForm f_;
  int n_;
  std::vector<VecQ> reductions_;  // theta^k for k = 0..2n-2
  std::vector<VecQ> zetas_;
  MatQ zeta_matrix_;
};

using AlgebraPtr = std::shared_ptr<const Algebra>;

struct AlgebraElement {
  AlgebraPtr alg;
  VecQ coords;

  AlgebraElement operator*(const AlgebraElement& o) const;
  AlgebraElement operator+(const AlgebraElement& o) const;
  AlgebraElement operator-(const AlgebraElement& o) const;
  AlgebraElement operator*(const Rat& c) const;
  bool operator==(const AlgebraElement& o) const;
  AlgebraElement inverse() const;
  AlgebraElement pow(long k) const;
};

AlgebraElement element(const AlgebraPtr& alg, const std::vector<Rat>& coords);
AlgebraElement theta(const AlgebraPtr& alg);
AlgebraElement scalar(const AlgebraPtr& alg, const Rat& c);
AlgebraElement multiply(const AlgebraElement& x, const AlgebraElement& y);
Rat elem_norm(const AlgebraElement& x);

struct ZetaBasis {
  BinaryForm form;
  std::vector<AlgebraElement> zetas;
  std::vector<PolyZ> pi_polys;  // p_i(t), coefficient j of t^j
};

ZetaBasis zeta_basis(const BinaryForm& f);
PolyZ zeta_poly(const BinaryForm& f, int i);

struct BasedIdeal {
  AlgebraPtr alg;
  MatQ basis;  // rows are basis vectors in power-basis coordinates

  AlgebraElement generator(int i) const;
  bool contains(const VecQ& x) const;
  bool contains_lattice(const BasedIdeal& other) const;
  bool same_lattice(const BasedIdeal& other) const;
  BasedIdeal scaled(const AlgebraElement& k) const;
};

BasedIdeal ideal_power_basis(const AlgebraPtr& alg, int k);
BasedIdeal ideal_power_basis(const BinaryForm& f, int k);
Rat ideal_norm(const BasedIdeal& I);
// Z-span of all pairwise products, reduced to a basis by Hermite normal form.
BasedIdeal ideal_product(const BasedIdeal& I, const BasedIdeal& J);

struct DescentDatum {
  BasedIdeal ideal;
  AlgebraElement alpha;
};

struct DatumCheck {
  bool containment = false;
  bool norm_condition = false;
  int norm_sign = 0;  // sign of N(I) used to satisfy the norm condition
  bool ok() const { return containment && norm_condition; }
};

DatumCheck check_datum(const DescentDatum& d);
// The datum (I_f^((n-2)/2), 1); needs even degree.
DescentDatum canonical_datum(const BinaryForm& f);
QuadPair construct_pair(const DescentDatum& d);
DescentDatum sl2_transport(const Moebius& gamma, const DescentDatum& d);
QuadPair scale_pair(const QuadPair& p, const Int& r, const BinaryForm& f);

// Hermite normal form of the row lattice of an integral matrix (rank rows kept).
MatZ hermite_rows(const MatZ& m);

}  // namespace twosel
