#pragma once

#include "twosel/arith.hpp"

#include <optional>
#include <string>
#include <vector>

namespace twosel {

// f(x,y) = sum_i coeffs[i] x^(n-i) y^i
struct BinaryForm {
  std::vector<Int> coeffs;

  BinaryForm() = default;
  explicit BinaryForm(std::vector<Int> c);
  BinaryForm(std::initializer_list<long> c);

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
  const Int& operator[](int i) const { return coeffs[i]; }
  bool is_zero() const;
  bool is_separable() const;
  bool operator==(const BinaryForm& o) const { return coeffs == o.coeffs; }
  bool operator!=(const BinaryForm& o) const { return coeffs != o.coeffs; }
  bool operator<(const BinaryForm& o) const { return coeffs < o.coeffs; }
  Int eval(const Int& x, const Int& y) const;
  PolyQ dehomogenize() const;  // f(x,1), coefficient i of x^i
};

// Forms with rational coefficients arise as intermediate results of the twisted action.
struct RationalForm {
  std::vector<Rat> coeffs;
  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
  bool is_integral() const;
  BinaryForm to_integral() const;  // throws unless integral
  bool operator==(const RationalForm& o) const { return coeffs == o.coeffs; }
};

RationalForm to_rational(const BinaryForm& f);

struct InvariantData {
  Int I, J;
  Rat Delta, height;
};

// 2x2 rational matrix up to scaling; stored as its primitive integral representative.
class Moebius {
 public:
  Moebius(const Rat& s, const Rat& t, const Rat& u, const Rat& v);
  static Moebius identity() { return Moebius(1, 0, 0, 1); }
  static Moebius swap() { return Moebius(0, 1, 1, 0); }

  const Rat& operator()(int i, int j) const { return e_[2 * i + j]; }
  Rat det() const { return e_[0] * e_[3] - e_[1] * e_[2]; }
  Moebius operator*(const Moebius& o) const;
  // Entries scaled so that they are coprime integers with the first nonzero entry positive.
  Moebius canonical() const;
  bool operator==(const Moebius& o) const;
  bool is_unimodular() const;  // integral entries, det = +-1

 private:
  Rat e_[4];
};

struct EllipticCurve {
  Int I, J;  // y^2 = x^3 - (I/3) x - J/27
  bool operator==(const EllipticCurve& o) const { return I == o.I && J == o.J; }
};

RationalForm act(const Moebius& gamma, const BinaryForm& f);
RationalForm act(const Moebius& gamma, const RationalForm& f);
BinaryForm act_substitution(const Moebius& gamma, const BinaryForm& f);

InvariantData invariants(const BinaryForm& f);
Rat curve_discriminant(const Int& I, const Int& J);  // (4I^3 - J^2)/27
Rat height(const Int& I, const Int& J);

Int discriminant(const BinaryForm& f);

BinaryForm monicize(const BinaryForm& f);
std::optional<BinaryForm> demonicize(const BinaryForm& g, const Int& a);

EllipticCurve normalize_curve(const Int& I, const Int& J);
// Invariants of the integral quartics attached to a curve: (2^4 I, 2^6 J).
std::pair<Int, Int> quartic_invariants(const EllipticCurve& e);

BinaryForm parse_form(const std::string& text);
std::string format_form(const BinaryForm& f);
std::string format_form(const RationalForm& f);

}  // namespace twosel
