#include "twosel/forms.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace twosel {

BinaryForm::BinaryForm(std::vector<Int> c) : coeffs(std::move(c)) {
  if (coeffs.empty()) throw Error("binary form needs at least one coefficient");
}

BinaryForm::BinaryForm(std::initializer_list<long> c) {
  for (long v : c) coeffs.emplace_back(v);
  if (coeffs.empty()) throw Error("binary form needs at least one coefficient");
}

bool BinaryForm::is_zero() const {
  return std::all_of(coeffs.begin(), coeffs.end(), [](const Int& c) { return c == 0; });
}

bool BinaryForm::is_separable() const { return degree() >= 2 && discriminant(*this) != 0; }

Int BinaryForm::eval(const Int& x, const Int& y) const {
  const int n = degree();
  Int r = 0;
  for (int i = 0; i <= n; ++i) r += coeffs[i] * ipow(x, n - i) * ipow(y, i);
  return r;
}

PolyQ BinaryForm::dehomogenize() const {
  const int n = degree();
  PolyQ p(n + 1);
  for (int i = 0; i <= n; ++i) p[n - i] = Rat(coeffs[i]);
  trim(p);
  return p;
}

bool RationalForm::is_integral() const {
  return std::all_of(coeffs.begin(), coeffs.end(), [](const Rat& c) { return c.get_den() == 1; });
}

BinaryForm RationalForm::to_integral() const {
  std::vector<Int> c;
  for (const Rat& q : coeffs) {
    if (q.get_den() != 1) throw Error("form is not integral");
    c.push_back(q.get_num());
  }
  return BinaryForm(c);
}

RationalForm to_rational(const BinaryForm& f) {
  RationalForm r;
  for (const Int& c : f.coeffs) r.coeffs.emplace_back(c);
  return r;
}

Moebius::Moebius(const Rat& s, const Rat& t, const Rat& u, const Rat& v) : e_{s, t, u, v} {}

Moebius Moebius::operator*(const Moebius& o) const {
  return Moebius(e_[0] * o.e_[0] + e_[1] * o.e_[2], e_[0] * o.e_[1] + e_[1] * o.e_[3],
                 e_[2] * o.e_[0] + e_[3] * o.e_[2], e_[2] * o.e_[1] + e_[3] * o.e_[3]);
}

Moebius Moebius::canonical() const {
  Int l = 1, g = 0;
  for (const Rat& q : e_) l = lcm(l, q.get_den());
  Int z[4];
  for (int i = 0; i < 4; ++i) {
    Rat s = e_[i] * l;
    z[i] = s.get_num();
    g = gcd(g, z[i]);
  }
  if (g == 0) throw Error("zero matrix has no canonical scaling");
  int first = 0;
  while (z[first] == 0) ++first;
  if (z[first] < 0) g = -g;
  return Moebius(Rat(z[0] / g), Rat(z[1] / g), Rat(z[2] / g), Rat(z[3] / g));
}

bool Moebius::operator==(const Moebius& o) const {
  Moebius a = canonical(), b = o.canonical();
  for (int i = 0; i < 4; ++i)
    if (a.e_[i] != b.e_[i]) return false;
  return true;
}

bool Moebius::is_unimodular() const {
  for (const Rat& q : e_)
    if (q.get_den() != 1) return false;
  Rat d = det();
  return d == 1 || d == -1;
}

namespace {

using HomPoly = std::vector<Rat>;  // coefficient i of x^(deg-i) y^i

HomPoly hmul(const HomPoly& a, const HomPoly& b) {
  HomPoly r(a.size() + b.size() - 1, Rat(0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

// f((x,y) gamma) without any twist.
std::vector<Rat> substitute(const Moebius& g, const std::vector<Rat>& f) {
  const int n = static_cast<int>(f.size()) - 1;
  HomPoly lx{g(0, 0), g(1, 0)};  // x' = s x + u y
  HomPoly ly{g(0, 1), g(1, 1)};  // y' = t x + v y
  std::vector<HomPoly> px(n + 1), py(n + 1);
  px[0] = py[0] = HomPoly{Rat(1)};
  for (int k = 1; k <= n; ++k) {
    px[k] = hmul(px[k - 1], lx);
    py[k] = hmul(py[k - 1], ly);
  }
  std::vector<Rat> out(n + 1, Rat(0));
  for (int i = 0; i <= n; ++i) {
    if (f[i] == 0) continue;
    HomPoly term = hmul(px[n - i], py[i]);
    for (int k = 0; k <= n; ++k) out[k] += f[i] * term[k];
  }
  return out;
}

}  // namespace

RationalForm act(const Moebius& gamma, const RationalForm& f) {
  const int n = f.degree();
  if (n % 2 != 0) throw Error("twisted action requires even degree");
  Rat d = gamma.det();
  if (d == 0) throw Error("non-invertible transformation");
  RationalForm r{substitute(gamma, f.coeffs)};
  Rat scale = rpow(d, -n / 2);
  for (Rat& c : r.coeffs) c *= scale;
  return r;
}

RationalForm act(const Moebius& gamma, const BinaryForm& f) { return act(gamma, to_rational(f)); }

BinaryForm act_substitution(const Moebius& gamma, const BinaryForm& f) {
  if (!gamma.is_unimodular()) throw Error("substitution requires an integral matrix of determinant +-1");
  return RationalForm{substitute(gamma, to_rational(f).coeffs)}.to_integral();
}

InvariantData invariants(const BinaryForm& f) {
  if (f.degree() != 4) throw Error("invariants are defined for quartic forms");
  const Int &a = f[0], &b = f[1], &c = f[2], &d = f[3], &e = f[4];
  InvariantData r;
  r.I = 12 * a * e - 3 * b * d + c * c;
  r.J = 72 * a * c * e + 9 * b * c * d - 27 * a * d * d - 27 * e * b * b - 2 * c * c * c;
  r.Delta = curve_discriminant(r.I, r.J);
  r.height = height(r.I, r.J);
  return r;
}

Rat curve_discriminant(const Int& I, const Int& J) {
  Rat d(4 * I * I * I - J * J, 27);
  d.canonicalize();
  return d;
}

Rat height(const Int& I, const Int& J) {
  Rat cube(abs(I * I * I)), sq(J * J, 4);
  sq.canonicalize();
  Rat h = Rat(4, 27) * std::max(cube, sq);
  h.canonicalize();
  return h;
}

Int discriminant(const BinaryForm& f) {
  const int n = f.degree();
  if (n < 2) throw Error("discriminant needs degree at least 2");
  if (f.is_zero()) return 0;
  if (f[0] == 0) {
    // Move a nonzero value of f into the leading slot with a unimodular substitution.
    for (long k = 0;; ++k) {
      if (f.eval(1, k) != 0) return discriminant(act_substitution(Moebius(1, k, 0, 1), f));
    }
  }
  PolyQ p = f.dehomogenize();
  Rat r = resultant(p, poly_derivative(p)) / Rat(f[0]);
  if ((n * (n - 1) / 2) % 2 != 0) r = -r;
  if (r.get_den() != 1) throw Error("non-integral discriminant");
  return r.get_num();
}

BinaryForm monicize(const BinaryForm& f) {
  if (f[0] == 0) throw Error("no monicization");
  std::vector<Int> c(f.coeffs.size());
  c[0] = 1;
  Int pw = 1;
  for (int i = 1; i <= f.degree(); ++i) {
    c[i] = f[i] * pw;
    pw *= f[0];
  }
  return BinaryForm(c);
}

std::optional<BinaryForm> demonicize(const BinaryForm& g, const Int& a) {
  if (g[0] != 1) throw Error("demonicization expects a monic form");
  if (a == 0) throw Error("demonicization at zero");
  std::vector<Int> c(g.coeffs.size());
  c[0] = a;
  Int pw = 1;
  for (int i = 1; i <= g.degree(); ++i) {
    if (!mpz_divisible_p(g[i].get_mpz_t(), pw.get_mpz_t())) return std::nullopt;
    c[i] = g[i] / pw;
    pw *= a;
  }
  return BinaryForm(c);
}

EllipticCurve normalize_curve(const Int& I0, const Int& J0) {
  if (curve_discriminant(I0, J0) == 0) throw Error("singular curve");
  Int I = I0, J = J0;
  if (I % 3 != 0 || J % 27 != 0) {
    I *= 81;
    J *= 729;
  }
  // Remove every p with 3p^4 | I and 27p^6 | J.
  Int g = gcd(I, J);
  std::vector<Int> candidates;
  if (I == 0)
    candidates = prime_divisors(J);
  else if (J == 0)
    candidates = prime_divisors(I);
  else
    candidates = prime_divisors(g);
  for (const Int& p : candidates) {
    const Int p4 = ipow(p, 4), p6 = ipow(p, 6);
    while (I % (3 * p4) == 0 && J % (27 * p6) == 0) {
      I /= p4;
      J /= p6;
    }
  }
  return EllipticCurve{I, J};
}

std::pair<Int, Int> quartic_invariants(const EllipticCurve& e) { return {16 * e.I, 64 * e.J}; }

BinaryForm parse_form(const std::string& text) {
  std::string s;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) s.push_back(ch);
  if (s.size() < 2 || s.front() != '[' || s.back() != ']') throw Error("form must look like [f0,...,fn]");
  s = s.substr(1, s.size() - 2);
  std::vector<Int> c;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    Int v;
    if (tok.empty() || v.set_str(tok, 10) != 0) throw Error("bad coefficient '" + tok + "'");
    c.push_back(v);
  }
  return BinaryForm(c);
}

std::string format_form(const BinaryForm& f) {
  std::string s = "[";
  for (std::size_t i = 0; i < f.coeffs.size(); ++i) {
    if (i) s += ",";
    s += f.coeffs[i].get_str();
  }
  return s + "]";
}

std::string format_form(const RationalForm& f) {
  std::string s = "[";
  for (std::size_t i = 0; i < f.coeffs.size(); ++i) {
    if (i) s += ",";
    s += f.coeffs[i].get_str();
  }
  return s + "]";
}

}  // namespace twosel
