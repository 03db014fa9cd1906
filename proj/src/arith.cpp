#include "twosel/arith.hpp"

#include <algorithm>

namespace twosel {

Int ipow(const Int& base, unsigned long e) {
  Int r;
  mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
  return r;
}

Rat rpow(const Rat& base, long e) {
  if (e < 0) {
    if (base == 0) throw Error("zero to a negative power");
    Rat inv = 1 / base;
    return rpow(inv, -e);
  }
  Rat r(ipow(base.get_num(), e), ipow(base.get_den(), e));
  r.canonicalize();
  return r;
}

i64 ipow64(i64 base, int e) {
  i64 r = 1;
  while (e-- > 0) r *= base;
  return r;
}

int valuation(const Int& n, const Int& p, int cap) {
  if (n == 0) return cap;
  Int m = abs(n);
  int v = 0;
  while (v < cap && mpz_divisible_p(m.get_mpz_t(), p.get_mpz_t())) {
    m /= p;
    ++v;
  }
  return v;
}

int valuation(const Rat& q, const Int& p, int cap) {
  if (q == 0) return cap;
  return valuation(q.get_num(), p) - valuation(q.get_den(), p);
}

int valuation64(i64 n, i64 p, int cap) {
  if (n == 0) return cap;
  int v = 0;
  while (v < cap && n % p == 0) {
    n /= p;
    ++v;
  }
  return v;
}

bool is_square(const Int& n) { return n >= 0 && mpz_perfect_square_p(n.get_mpz_t()); }

Int isqrt(const Int& n) {
  if (n < 0) throw Error("isqrt of negative number");
  Int r;
  mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
  return r;
}

i64 isqrt64(i64 n) {
  if (n < 0) throw Error("isqrt of negative number");
  i64 r = static_cast<i64>(__builtin_sqrtl(static_cast<long double>(n)));
  while (r > 0 && static_cast<i128>(r) * r > n) --r;
  while (static_cast<i128>(r + 1) * (r + 1) <= n) ++r;
  return r;
}

bool is_square64(i64 n, i64* root) {
  if (n < 0) return false;
  i64 r = isqrt64(n);
  if (root) *root = r;
  return r * r == n;
}

bool is_prime(const Int& n) {
  if (n < 2) return false;
  return mpz_probab_prime_p(n.get_mpz_t(), 40) > 0;
}

std::vector<std::pair<Int, int>> factorize(const Int& n0) {
  if (n0 == 0) throw Error("cannot factor zero");
  std::vector<std::pair<Int, int>> out;
  Int n = abs(n0);
  auto strip = [&](const Int& p) {
    int e = 0;
    while (mpz_divisible_p(n.get_mpz_t(), p.get_mpz_t())) {
      n /= p;
      ++e;
    }
    if (e) out.emplace_back(p, e);
  };
  strip(2);
  strip(3);
  for (unsigned long d = 5; n > 1; d += 6) {
    if (Int(d) * d > n) break;
    if (d > 50000000UL) {
      if (is_prime(n)) break;
      throw Error("factorization beyond trial-division range");
    }
    strip(Int(d));
    strip(Int(d + 2));
  }
  if (n > 1) out.emplace_back(n, 1);
  std::sort(out.begin(), out.end(), [](auto& a, auto& b) { return a.first < b.first; });
  return out;
}

std::vector<Int> prime_divisors(const Int& n) {
  std::vector<Int> ps;
  for (auto& [p, e] : factorize(n)) ps.push_back(p);
  return ps;
}

std::vector<Int> divisors(const Int& n) {
  std::vector<Int> ds{1};
  for (auto& [p, e] : factorize(n)) {
    std::size_t k = ds.size();
    Int pk = 1;
    for (int i = 1; i <= e; ++i) {
      pk *= p;
      for (std::size_t j = 0; j < k; ++j) ds.push_back(ds[j] * pk);
    }
  }
  std::sort(ds.begin(), ds.end());
  return ds;
}

std::vector<int> primes_up_to(int n) {
  std::vector<char> sieve(n + 1, 1);
  std::vector<int> ps;
  for (int i = 2; i <= n; ++i) {
    if (!sieve[i]) continue;
    ps.push_back(i);
    for (long j = static_cast<long>(i) * i; j <= n; j += i) sieve[j] = 0;
  }
  return ps;
}

i64 mod64(i64 a, i64 m) {
  i64 r = a % m;
  return r < 0 ? r + m : r;
}

i64 mulmod64(i64 a, i64 b, i64 m) {
  i128 r = static_cast<i128>(a) * b % m;
  if (r < 0) r += m;
  return static_cast<i64>(r);
}

i64 invmod64(i64 a, i64 m) {
  i64 old_r = mod64(a, m), old_s = 1, s = 0, r = m;
  while (r != 0) {
    i64 q = old_r / r;
    i64 t = old_r - q * r;
    old_r = r;
    r = t;
    t = old_s - q * s;
    old_s = s;
    s = t;
  }
  if (old_r != 1) throw Error("residue not invertible");
  return mod64(old_s, m);
}

int legendre(i64 a, i64 p) {
  a = mod64(a, p);
  if (a == 0) return 0;
  i64 e = (p - 1) / 2, r = 1, b = a;
  while (e) {
    if (e & 1) r = mulmod64(r, b, p);
    b = mulmod64(b, b, p);
    e >>= 1;
  }
  return r == 1 ? 1 : -1;
}

bool is_integral(const Rat& q) { return q.get_den() == 1; }

bool all_integral(const MatQ& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (!is_integral(m(i, j))) return false;
  return true;
}

MatQ to_rat(const MatZ& m) {
  MatQ r(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) r(i, j) = Rat(m(i, j));
  return r;
}

MatZ to_int(const MatQ& m) {
  MatZ r(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (!is_integral(m(i, j))) throw Error("matrix entry is not integral");
      r(i, j) = m(i, j).get_num();
    }
  return r;
}

MatZ from64(const Mat64& m) {
  MatZ r(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) r(i, j) = Int(static_cast<long>(m(i, j)));
  return r;
}

Int det(const MatZ& m0) {
  const Eigen::Index n = m0.rows();
  if (n != m0.cols()) throw Error("determinant of non-square matrix");
  if (n == 0) return 1;
  MatZ m = m0;
  Int prev = 1;
  int sign = 1;
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    if (m(k, k) == 0) {
      Eigen::Index r = k + 1;
      while (r < n && m(r, k) == 0) ++r;
      if (r == n) return 0;
      m.row(k).swap(m.row(r));
      sign = -sign;
    }
    for (Eigen::Index i = k + 1; i < n; ++i)
      for (Eigen::Index j = k + 1; j < n; ++j) {
        Int t = m(i, j) * m(k, k) - m(i, k) * m(k, j);
        mpz_divexact(t.get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
        m(i, j) = t;
      }
    prev = m(k, k);
  }
  return sign * m(n - 1, n - 1);
}

Rat det(const MatQ& m0) {
  const Eigen::Index n = m0.rows();
  if (n != m0.cols()) throw Error("determinant of non-square matrix");
  MatQ m = m0;
  Rat d = 1;
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index r = k;
    while (r < n && m(r, k) == 0) ++r;
    if (r == n) return 0;
    if (r != k) {
      m.row(k).swap(m.row(r));
      d = -d;
    }
    d *= m(k, k);
    for (Eigen::Index i = k + 1; i < n; ++i) {
      if (m(i, k) == 0) continue;
      Rat f = m(i, k) / m(k, k);
      for (Eigen::Index j = k; j < n; ++j) m(i, j) -= f * m(k, j);
    }
  }
  return d;
}

MatQ inverse(const MatQ& m0) {
  const Eigen::Index n = m0.rows();
  if (n != m0.cols()) throw Error("inverse of non-square matrix");
  MatQ m = m0;
  MatQ inv = MatQ::Identity(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index r = k;
    while (r < n && m(r, k) == 0) ++r;
    if (r == n) throw Error("singular matrix");
    if (r != k) {
      m.row(k).swap(m.row(r));
      inv.row(k).swap(inv.row(r));
    }
    Rat piv = m(k, k);
    for (Eigen::Index j = 0; j < n; ++j) {
      m(k, j) /= piv;
      inv(k, j) /= piv;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i == k || m(i, k) == 0) continue;
      Rat f = m(i, k);
      for (Eigen::Index j = 0; j < n; ++j) {
        m(i, j) -= f * m(k, j);
        inv(i, j) -= f * inv(k, j);
      }
    }
  }
  return inv;
}

bool solve_left(const MatQ& m, const VecQ& v, VecQ& x) {
  if (det(m) == 0) return false;
  MatQ inv = inverse(m);
  x = VecQ(m.rows());
  for (Eigen::Index j = 0; j < m.rows(); ++j) {
    Rat s = 0;
    for (Eigen::Index k = 0; k < m.cols(); ++k) s += v(k) * inv(k, j);
    x(j) = s;
  }
  return true;
}

int rank(const MatQ& m0) {
  MatQ m = m0;
  int rk = 0;
  Eigen::Index rows = m.rows(), cols = m.cols();
  for (Eigen::Index c = 0; c < cols && rk < rows; ++c) {
    Eigen::Index r = rk;
    while (r < rows && m(r, c) == 0) ++r;
    if (r == rows) continue;
    m.row(rk).swap(m.row(r));
    for (Eigen::Index i = rk + 1; i < rows; ++i) {
      if (m(i, c) == 0) continue;
      Rat f = m(i, c) / m(rk, c);
      for (Eigen::Index j = c; j < cols; ++j) m(i, j) -= f * m(rk, j);
    }
    ++rk;
  }
  return rk;
}

void trim(PolyQ& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}

PolyQ poly_mul(const PolyQ& a, const PolyQ& b) {
  if (a.empty() || b.empty()) return {};
  PolyQ r(a.size() + b.size() - 1, Rat(0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  trim(r);
  return r;
}

PolyQ poly_add(const PolyQ& a, const PolyQ& b) {
  PolyQ r(std::max(a.size(), b.size()), Rat(0));
  for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) r[i] += b[i];
  trim(r);
  return r;
}

PolyQ poly_divmod(const PolyQ& a, const PolyQ& b0, PolyQ* rem) {
  PolyQ b = b0;
  trim(b);
  if (b.empty()) throw Error("polynomial division by zero");
  PolyQ r = a;
  trim(r);
  PolyQ q;
  if (r.size() >= b.size()) q.assign(r.size() - b.size() + 1, Rat(0));
  while (!r.empty() && r.size() >= b.size()) {
    std::size_t shift = r.size() - b.size();
    Rat c = r.back() / b.back();
    q[shift] = c;
    for (std::size_t i = 0; i < b.size(); ++i) r[i + shift] -= c * b[i];
    trim(r);
  }
  if (rem) *rem = r;
  trim(q);
  return q;
}

PolyQ poly_derivative(const PolyQ& a) {
  PolyQ r;
  for (std::size_t i = 1; i < a.size(); ++i) r.push_back(a[i] * static_cast<long>(i));
  trim(r);
  return r;
}

PolyQ poly_gcd(const PolyQ& a0, const PolyQ& b0) {
  PolyQ a = a0, b = b0;
  trim(a);
  trim(b);
  while (!b.empty()) {
    PolyQ r;
    poly_divmod(a, b, &r);
    a = b;
    b = r;
  }
  if (!a.empty()) {
    Rat lc = a.back();
    for (auto& c : a) c /= lc;
  }
  return a;
}

Rat poly_eval(const PolyQ& p, const Rat& x) {
  Rat r = 0;
  for (std::size_t i = p.size(); i-- > 0;) r = r * x + p[i];
  return r;
}

Rat resultant(const PolyQ& a0, const PolyQ& b0) {
  PolyQ a = a0, b = b0;
  trim(a);
  trim(b);
  if (a.empty() || b.empty()) return 0;
  const std::size_t m = a.size() - 1, n = b.size() - 1;
  if (m + n == 0) return 1;
  MatQ s = MatQ::Zero(m + n, m + n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= m; ++j) s(i, i + j) = a[m - j];
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j <= n; ++j) s(n + i, i + j) = b[n - j];
  return det(s);
}

std::string to_string(const Int& n) { return n.get_str(); }
std::string to_string(const Rat& q) { return q.get_str(); }

}  // namespace twosel
