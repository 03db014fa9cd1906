#include "twosel/pairs.hpp"

#include <algorithm>
#include <array>
#include <numeric>

namespace twosel {

namespace {

template <class S>
std::vector<S> expand_det(const Mat<S>& A, const Mat<S>& B) {
  const int n = static_cast<int>(A.rows());
  if (B.rows() != n || A.cols() != n || B.cols() != n) throw Error("pair matrices must be square of equal size");
  std::vector<S> out(n + 1, S(0));
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    int inversions = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (perm[i] > perm[j]) ++inversions;
    // product of the linear forms A_{i,perm i} x + B_{i,perm i} y
    std::vector<S> poly{S(1)};
    bool zero = false;
    for (int i = 0; i < n && !zero; ++i) {
      const S& a = A(i, perm[i]);
      const S& b = B(i, perm[i]);
      if (a == 0 && b == 0) {
        zero = true;
        break;
      }
      std::vector<S> next(poly.size() + 1, S(0));
      for (std::size_t k = 0; k < poly.size(); ++k) {
        next[k] += poly[k] * a;
        next[k + 1] += poly[k] * b;
      }
      poly = std::move(next);
    }
    if (zero) continue;
    for (int k = 0; k <= n; ++k) {
      if (inversions % 2)
        out[k] -= poly[k];
      else
        out[k] += poly[k];
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

template <class S>
std::string format_mat(const Mat<S>& m) {
  std::string s = "[";
  for (int i = 0; i < m.rows(); ++i) {
    s += i ? ",[" : "[";
    for (int j = 0; j < m.cols(); ++j) {
      if (j) s += ",";
      s += m(i, j).get_str();
    }
    s += "]";
  }
  return s + "]";
}

bool is_unit_det(const MatZ& g) {
  if (g.rows() != g.cols()) return false;
  Int d = det(g);
  return d == 1 || d == -1;
}

}  // namespace

bool is_symmetric(const MatZ& m) { return m.rows() == m.cols() && m == m.transpose(); }

MatZ antidiagonal(int n) {
  if (n <= 0 || n % 2 != 0) throw Error("antidiagonal form needs positive even dimension");
  MatZ a = MatZ::Zero(n, n);
  for (int i = 0; i < n; ++i) a(i, n - 1 - i) = 1;
  return a;
}

BinaryForm resolvent(const QuadPair& p) { return BinaryForm(expand_det<Int>(p.A, p.B)); }

RationalForm resolvent(const RationalPair& p) { return RationalForm{expand_det<Rat>(p.A, p.B)}; }

QuadPair act_slnpm(const MatZ& g, const QuadPair& p) {
  if (!is_unit_det(g)) throw Error("group element must be integral with determinant +-1");
  MatZ gt = g.transpose();
  MatZ A = g * p.A * gt;
  MatZ B = g * p.B * gt;
  return {A, B};
}

RationalPair act_quotient(const QuotientElement& q, const QuadPair& p) {
  if (q.r == 0) throw Error("r must be nonzero");
  if (!is_unit_det(q.g)) throw Error("group element must be integral with determinant +-1");
  const int n = p.dim();
  if (n % 2 != 0) throw Error("quotient action needs even dimension");
  auto twist = [&](const MatZ& m) {
    MatQ t(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const bool lo_i = i < n / 2, lo_j = j < n / 2;
        Rat f = lo_i && lo_j ? q.r : (!lo_i && !lo_j ? Rat(1) / q.r : Rat(1));
        t(i, j) = Rat(m(i, j)) * f;
      }
    MatQ g = to_rat(q.g);
    MatQ gt = g.transpose();
    MatQ out = g * t * gt;
    return out;
  };
  return {twist(p.A), twist(p.B)};
}

MatQ pso_act(const MatQ& g, const MatZ& B, const MatZ& A) {
  MatQ a = to_rat(A);
  MatQ gt = g.transpose();
  MatQ check = g * a * gt;
  if (check != a) throw Error("g does not preserve A");
  MatQ out = g * to_rat(B) * gt;
  return out;
}

bool condition_b(const BinaryForm& f, const QuadPair& p) {
  const int n = f.degree();
  if (f[0] == 0) throw Error("condition (b) needs f0 != 0");
  MatQ A = to_rat(p.A);
  if (det(A) == 0) throw Error("singular A");
  MatQ ainv = inverse(A);
  MatQ b = to_rat(p.B);
  MatQ M = ainv * b;
  M *= Rat(-1) / Rat(f[0]);
  // powers of M up to n-1
  std::vector<MatQ> pw{MatQ::Identity(n, n)};
  for (int k = 1; k < n; ++k) {
    MatQ next = pw.back() * M;
    pw.push_back(next);
  }
  for (int i = 1; i < n; ++i) {
    MatQ acc = MatQ::Zero(n, n);
    for (int j = 0; j < i; ++j) {
      MatQ term = pw[i - j] * Rat(f[j]);
      acc += term;
    }
    if (!all_integral(acc)) return false;
  }
  return true;
}

bool arises_for(const BinaryForm& f, const QuadPair& p) {
  if (p.dim() != f.degree()) return false;
  if (det(p.A) == 0) throw Error("singular A");
  if (resolvent(p) != monicize(f)) return false;
  return condition_b(f, p);
}

bool is_distinguished_modp(const QuadPair& p, long q) {
  if (p.dim() != 4) throw Error("distinguished test supports n = 4 only");
  if (q < 3 || !is_prime(Int(q))) throw Error("distinguished test needs an odd prime");
  i64 A[4][4], B[4][4];
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      A[i][j] = Int(p.A(i, j) % q).get_si();
      B[i][j] = Int(p.B(i, j) % q).get_si();
      A[i][j] = mod64(A[i][j], q);
      B[i][j] = mod64(B[i][j], q);
    }
  auto bil = [&](i64 M[4][4], const i64* v, const i64* w) {
    i64 s = 0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) s = (s + M[i][j] * v[i] % q * w[j]) % q;
    return s;
  };
  // projective points with first nonzero coordinate 1
  std::vector<std::array<i64, 4>> points;
  for (int lead = 0; lead < 4; ++lead) {
    const int free = 3 - lead;
    long total = 1;
    for (int k = 0; k < free; ++k) total *= q;
    for (long idx = 0; idx < total; ++idx) {
      std::array<i64, 4> v{0, 0, 0, 0};
      v[lead] = 1;
      long t = idx;
      for (int k = lead + 1; k < 4; ++k) {
        v[k] = t % q;
        t /= q;
      }
      points.push_back(v);
    }
  }
  for (const auto& v : points) {
    if (bil(A, v.data(), v.data()) != 0 || bil(B, v.data(), v.data()) != 0) continue;
    for (const auto& w : points) {
      if (w == v) continue;
      if (bil(A, v.data(), w.data()) == 0 && bil(A, w.data(), w.data()) == 0) return true;
    }
  }
  return false;
}

std::string format_matrix(const MatZ& m) { return format_mat(m); }
std::string format_matrix(const MatQ& m) { return format_mat(m); }

}  // namespace twosel
