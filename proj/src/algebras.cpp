#include "twosel/algebras.hpp"

#include "twosel/pairs.hpp"

#include <algorithm>

namespace twosel {

namespace {

VecQ zero_vec(int n) {
  VecQ v(n);
  for (int i = 0; i < n; ++i) v(i) = 0;
  return v;
}

void require_same(const AlgebraPtr& a, const AlgebraPtr& b) {
  if (a.get() != b.get() && a->form() != b->form()) throw Error("elements of different algebras");
}

}  // namespace

Algebra::Algebra(BinaryForm f) : f_(std::move(f)), n_(f_.degree()) {
  if (n_ < 1) throw Error("algebra needs a form of positive degree");
  if (f_[0] == 0) throw Error("leading coefficient f0 must be nonzero");
  if (n_ >= 2 && discriminant(f_) == 0) throw Error("form is not separable");

  // theta^n = -(1/f0) sum_{i>=1} f_i theta^(n-i)
  VecQ top = zero_vec(n_);
  for (int i = 1; i <= n_; ++i) top(n_ - i) = Rat(-f_[i]) / Rat(f_[0]);
  for (int k = 0; k < n_; ++k) {
    VecQ e = zero_vec(n_);
    e(k) = 1;
    reductions_.push_back(e);
  }
  for (int k = n_; k <= 2 * n_ - 2; ++k) {
    const VecQ& prev = reductions_.back();
    VecQ next = zero_vec(n_);
    for (int i = 0; i + 1 < n_; ++i) next(i + 1) = prev(i);
    const Rat lead = prev(n_ - 1);
    if (lead != 0)
      for (int i = 0; i < n_; ++i) next(i) += lead * top(i);
    reductions_.push_back(next);
  }

  zeta_matrix_ = MatQ(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) zeta_matrix_(i, j) = 0;
  zeta_matrix_(0, 0) = 1;
  for (int i = 1; i < n_; ++i) {
    VecQ z = zero_vec(n_);
    for (int j = 0; j < i; ++j) z(i - j) = Rat(f_[j]);
    zetas_.push_back(z);
    zeta_matrix_.row(i) = z.transpose();
  }
}

std::shared_ptr<const Algebra> Algebra::make(const BinaryForm& f) { return std::make_shared<const Algebra>(f); }

VecQ Algebra::theta_power(int k) const {
  if (k < 0) throw Error("negative power");
  if (k < static_cast<int>(reductions_.size())) return reductions_[k];
  VecQ x = reductions_[1], r = reductions_[0];
  for (int i = 0; i < k; ++i) r = mul(r, x);
  return r;
}

VecQ Algebra::mul(const VecQ& x, const VecQ& y) const {
  std::vector<Rat> prod(2 * n_ - 1, Rat(0));
  for (int i = 0; i < n_; ++i) {
    if (x(i) == 0) continue;
    for (int j = 0; j < n_; ++j) prod[i + j] += x(i) * y(j);
  }
  VecQ r = zero_vec(n_);
  for (int k = 0; k < 2 * n_ - 1; ++k) {
    if (prod[k] == 0) continue;
    if (k < n_)
      r(k) += prod[k];
    else
      for (int i = 0; i < n_; ++i) r(i) += prod[k] * reductions_[k](i);
  }
  return r;
}

MatQ Algebra::mult_matrix(const VecQ& x) const {
  MatQ m(n_, n_);
  for (int i = 0; i < n_; ++i) m.row(i) = mul(x, reductions_[i]).transpose();
  return m;
}

Rat Algebra::norm(const VecQ& x) const { return det(mult_matrix(x)); }

VecQ Algebra::inverse(const VecQ& x) const {
  VecQ y;
  if (!solve_left(mult_matrix(x), reductions_[0], y)) throw Error("element is not invertible");
  return y;
}

AlgebraElement AlgebraElement::operator*(const AlgebraElement& o) const {
  require_same(alg, o.alg);
  return {alg, alg->mul(coords, o.coords)};
}

AlgebraElement AlgebraElement::operator+(const AlgebraElement& o) const {
  require_same(alg, o.alg);
  return {alg, coords + o.coords};
}

AlgebraElement AlgebraElement::operator-(const AlgebraElement& o) const {
  require_same(alg, o.alg);
  return {alg, coords - o.coords};
}

AlgebraElement AlgebraElement::operator*(const Rat& c) const {
  VecQ v = coords;
  for (int i = 0; i < v.size(); ++i) v(i) *= c;
  return {alg, v};
}

bool AlgebraElement::operator==(const AlgebraElement& o) const {
  return alg->form() == o.alg->form() && coords == o.coords;
}

AlgebraElement AlgebraElement::inverse() const { return {alg, alg->inverse(coords)}; }

AlgebraElement AlgebraElement::pow(long k) const {
  AlgebraElement base = k < 0 ? inverse() : *this;
  unsigned long e = k < 0 ? -k : k;
  AlgebraElement r = scalar(alg, 1);
  while (e) {
    if (e & 1) r = r * base;
    base = base * base;
    e >>= 1;
  }
  return r;
}

AlgebraElement element(const AlgebraPtr& alg, const std::vector<Rat>& coords) {
  if (static_cast<int>(coords.size()) != alg->degree()) throw Error("coordinate length must equal the degree");
  VecQ v(coords.size());
  for (std::size_t i = 0; i < coords.size(); ++i) v(i) = coords[i];
  return {alg, v};
}

AlgebraElement theta(const AlgebraPtr& alg) { return {alg, alg->theta_power(1)}; }

AlgebraElement scalar(const AlgebraPtr& alg, const Rat& c) {
  VecQ v = alg->unit();
  v(0) = c;
  return {alg, v};
}

AlgebraElement multiply(const AlgebraElement& x, const AlgebraElement& y) { return x * y; }

Rat elem_norm(const AlgebraElement& x) { return x.alg->norm(x.coords); }

PolyZ zeta_poly(const BinaryForm& f, int i) {
  PolyZ p(i + 1, Int(0));
  for (int j = 0; j < i; ++j) p[i - j] = f[j];
  return p;
}

ZetaBasis zeta_basis(const BinaryForm& f) {
  if (f[0] == 0) throw Error("zeta basis requires f0 != 0");
  auto alg = Algebra::make(f);
  ZetaBasis z{f, {}, {}};
  for (int i = 1; i < f.degree(); ++i) {
    z.zetas.push_back({alg, alg->zeta(i)});
    z.pi_polys.push_back(zeta_poly(f, i));
  }
  return z;
}

AlgebraElement BasedIdeal::generator(int i) const { return {alg, basis.row(i).transpose()}; }

bool BasedIdeal::contains(const VecQ& x) const {
  VecQ c;
  if (!solve_left(basis, x, c)) throw Error("singular ideal basis");
  for (int i = 0; i < c.size(); ++i)
    if (!is_integral(c(i))) return false;
  return true;
}

bool BasedIdeal::contains_lattice(const BasedIdeal& other) const {
  MatQ c = other.basis * inverse(basis);
  return all_integral(c);
}

bool BasedIdeal::same_lattice(const BasedIdeal& other) const {
  return contains_lattice(other) && other.contains_lattice(*this);
}

BasedIdeal BasedIdeal::scaled(const AlgebraElement& k) const {
  MatQ m(basis.rows(), basis.cols());
  for (int i = 0; i < basis.rows(); ++i) m.row(i) = alg->mul(k.coords, basis.row(i).transpose()).transpose();
  return {alg, m};
}

BasedIdeal ideal_power_basis(const AlgebraPtr& alg, int k) {
  const int n = alg->degree();
  if (k < 0 || k > n - 1) throw Error("ideal exponent out of range");
  MatQ m(n, n);
  for (int i = 0; i < n; ++i) {
    VecQ row = i <= k ? alg->theta_power(i) : alg->zeta(i);
    m.row(i) = row.transpose();
  }
  return {alg, m};
}

BasedIdeal ideal_power_basis(const BinaryForm& f, int k) { return ideal_power_basis(Algebra::make(f), k); }

Rat ideal_norm(const BasedIdeal& I) {
  Rat d = det(I.basis);
  if (d == 0) throw Error("singular ideal basis");
  return d / det(I.alg->zeta_matrix());
}

MatZ hermite_rows(const MatZ& m0) {
  MatZ m = m0;
  const int rows = static_cast<int>(m.rows()), cols = static_cast<int>(m.cols());
  int r = 0;
  for (int c = 0; c < cols && r < rows; ++c) {
    while (true) {
      int best = -1;
      for (int i = r; i < rows; ++i)
        if (m(i, c) != 0 && (best < 0 || abs(m(i, c)) < abs(m(best, c)))) best = i;
      if (best < 0) break;
      m.row(r).swap(m.row(best));
      bool clean = true;
      for (int i = r + 1; i < rows; ++i) {
        if (m(i, c) == 0) continue;
        Int q;
        mpz_fdiv_q(q.get_mpz_t(), m(i, c).get_mpz_t(), m(r, c).get_mpz_t());
        for (int j = 0; j < cols; ++j) m(i, j) -= q * m(r, j);
        if (m(i, c) != 0) clean = false;
      }
      if (clean) break;
    }
    if (r >= rows || m(r, c) == 0) continue;
    if (m(r, c) < 0)
      for (int j = 0; j < cols; ++j) m(r, j) = -m(r, j);
    for (int i = 0; i < r; ++i) {
      Int q;
      mpz_fdiv_q(q.get_mpz_t(), m(i, c).get_mpz_t(), m(r, c).get_mpz_t());
      if (q != 0)
        for (int j = 0; j < cols; ++j) m(i, j) -= q * m(r, j);
    }
    ++r;
  }
  MatZ out = m.topRows(r);
  return out;
}

BasedIdeal ideal_product(const BasedIdeal& I, const BasedIdeal& J) {
  require_same(I.alg, J.alg);
  const int n = I.alg->degree();
  MatQ gens(I.basis.rows() * J.basis.rows(), n);
  int r = 0;
  for (int i = 0; i < I.basis.rows(); ++i)
    for (int j = 0; j < J.basis.rows(); ++j)
      gens.row(r++) = I.alg->mul(I.basis.row(i).transpose(), J.basis.row(j).transpose()).transpose();
  Int den = 1;
  for (int i = 0; i < gens.rows(); ++i)
    for (int j = 0; j < n; ++j) den = lcm(den, gens(i, j).get_den());
  MatZ z(gens.rows(), n);
  for (int i = 0; i < gens.rows(); ++i)
    for (int j = 0; j < n; ++j) z(i, j) = Rat(gens(i, j) * den).get_num();
  MatZ h = hermite_rows(z);
  if (h.rows() != n) throw Error("product lattice is degenerate");
  MatQ basis(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) basis(i, j) = Rat(h(i, j), den);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) basis(i, j).canonicalize();
  return {I.alg, basis};
}

DatumCheck check_datum(const DescentDatum& d) {
  const AlgebraPtr& alg = d.ideal.alg;
  require_same(alg, d.alpha.alg);
  const int n = alg->degree();
  DatumCheck c;
  BasedIdeal target = ideal_power_basis(alg, n - 2);
  VecQ ainv = alg->inverse(d.alpha.coords);
  c.containment = true;
  for (int i = 0; i < n && c.containment; ++i)
    for (int j = i; j < n && c.containment; ++j) {
      VecQ prod = alg->mul(ainv, alg->mul(d.ideal.basis.row(i).transpose(), d.ideal.basis.row(j).transpose()));
      if (!target.contains(prod)) c.containment = false;
    }
  Rat nI = ideal_norm(d.ideal);
  c.norm_sign = sgn(nI);
  Rat rhs = alg->norm(d.alpha.coords) * rpow(Rat(alg->form()[0]), 2 - n);
  c.norm_condition = nI * nI == rhs;
  return c;
}

DescentDatum canonical_datum(const BinaryForm& f) {
  if (f.degree() % 2 != 0) throw Error("canonical datum needs even degree");
  auto alg = Algebra::make(f);
  return {ideal_power_basis(alg, (f.degree() - 2) / 2), scalar(alg, 1)};
}

QuadPair construct_pair(const DescentDatum& d) {
  if (!check_datum(d).ok()) throw Error("not a descent datum");
  const AlgebraPtr& alg = d.ideal.alg;
  const int n = alg->degree();
  BasedIdeal target = ideal_power_basis(alg, n - 2);
  VecQ ainv = alg->inverse(d.alpha.coords);
  QuadPair p{MatZ(n, n), MatZ(n, n)};
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      VecQ prod = alg->mul(ainv, alg->mul(d.ideal.basis.row(i).transpose(), d.ideal.basis.row(j).transpose()));
      VecQ c;
      solve_left(target.basis, prod, c);
      const Rat a = -c(n - 1), b = c(n - 2);
      if (!is_integral(a) || !is_integral(b)) throw Error("basis not admissible");
      p.A(i, j) = p.A(j, i) = a.get_num();
      p.B(i, j) = p.B(j, i) = b.get_num();
    }
  return p;
}

DescentDatum sl2_transport(const Moebius& gamma, const DescentDatum& d) {
  if (!gamma.is_unimodular()) throw Error("transport requires an integral matrix of determinant +-1");
  const AlgebraPtr& alg = d.ideal.alg;
  const BinaryForm& f = alg->form();
  const int n = alg->degree();
  const Rat &s = gamma(0, 0), &t = gamma(0, 1), &u = gamma(1, 0), &v = gamma(1, 1);
  BinaryForm g = act_substitution(gamma, f);
  if (g[0] == 0) throw Error("degenerate leading coefficient");
  auto alg2 = Algebra::make(g);
  AlgebraElement th = theta(alg2);
  AlgebraElement denom = th * t + scalar(alg2, v);
  AlgebraElement rho = (th * s + scalar(alg2, u)) * denom.inverse();
  // (-t rho + s)^{-1} = (t theta' + v) / det
  AlgebraElement twist = denom * (Rat(1) / gamma.det());

  auto image = [&](const VecQ& x) {
    AlgebraElement r = scalar(alg2, 0);
    for (int i = n - 1; i >= 0; --i) r = r * rho + scalar(alg2, x(i));
    return r;
  };
  MatQ basis(n, n);
  AlgebraElement ti = twist.pow(n / 2);
  for (int i = 0; i < n; ++i) basis.row(i) = (ti * image(d.ideal.basis.row(i).transpose())).coords.transpose();
  AlgebraElement alpha = twist.pow(2) * image(d.alpha.coords);
  return {{alg2, basis}, alpha};
}

QuadPair scale_pair(const QuadPair& p, const Int& r, const BinaryForm& f) {
  if (r == 0) throw Error("scaling factor must be nonzero");
  if (!arises_for(f, p)) throw Error("pair does not arise for the given form");
  QuadPair q = p;
  for (int i = 0; i < q.B.rows(); ++i)
    for (int j = 0; j < q.B.cols(); ++j) q.B(i, j) *= r;
  return q;
}

}  // namespace twosel
