#pragma once

#include "twosel/forms.hpp"

namespace twosel {

struct QuadPair {
  MatZ A, B;
  int dim() const { return static_cast<int>(A.rows()); }
  bool operator==(const QuadPair& o) const { return A == o.A && B == o.B; }
};

struct RationalPair {
  MatQ A, B;
};

// Class of g * eps_r in (SL_n / mu_2)(Q).
struct QuotientElement {
  MatZ g;
  Rat r;
};

bool is_symmetric(const MatZ& m);
MatZ antidiagonal(int n);

// det(xA + yB) by expansion over permutations with linear-form entries.
BinaryForm resolvent(const QuadPair& p);
RationalForm resolvent(const RationalPair& p);

QuadPair act_slnpm(const MatZ& g, const QuadPair& p);
RationalPair act_quotient(const QuotientElement& q, const QuadPair& p);
MatQ pso_act(const MatQ& g, const MatZ& B, const MatZ& A);

bool arises_for(const BinaryForm& f, const QuadPair& p);
// Condition (b) only: p_i(f0^{-1} (-A^{-1} B)) integral for i = 1..n-1.
bool condition_b(const BinaryForm& f, const QuadPair& p);

// Over F_q: an A-isotropic plane containing a B-isotropic line.
bool is_distinguished_modp(const QuadPair& p, long q);

std::string format_matrix(const MatZ& m);
std::string format_matrix(const MatQ& m);

}  // namespace twosel
