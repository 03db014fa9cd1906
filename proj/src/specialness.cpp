#include "twosel/specialness.hpp"

#include <algorithm>
#include <numeric>

namespace twosel {

namespace {

std::vector<std::vector<int>> subsets(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  auto rec = [&](auto&& self, int start) -> void {
    if (static_cast<int>(cur.size()) == k) {
      out.push_back(cur);
      return;
    }
    for (int i = start; i < n; ++i) {
      cur.push_back(i);
      self(self, i + 1);
      cur.pop_back();
    }
  };
  rec(rec, 0);
  return out;
}

i64 pow_checked(i64 p, int e) {
  i64 r = 1;
  for (int i = 0; i < e; ++i) {
    if (r > (i64(1) << 62) / p) throw Error("precision exhausted: p^N does not fit in 64 bits");
    r *= p;
  }
  return r;
}

i64 reduce(const Int& x, i64 q) {
  Int r = x % q;
  if (r < 0) r += q;
  return r.get_si();
}

struct ModWork {
  i64 p;
  int N;
  i64 q;
  Mat64 M, T;

  int val(i64 x) const { return mod64(x, q) == 0 ? N : valuation64(mod64(x, q), p, N); }

  void swap_coords(int i, int j) {
    if (i == j) return;
    M.row(i).swap(M.row(j));
    M.col(i).swap(M.col(j));
    T.row(i).swap(T.row(j));
  }

  // basis vector i += t * basis vector j
  void add(int i, int j, i64 t) {
    t = mod64(t, q);
    if (t == 0) return;
    const int n = static_cast<int>(M.rows());
    for (int c = 0; c < n; ++c) M(i, c) = mod64(M(i, c) + mulmod64(t, M(j, c), q), q);
    for (int r = 0; r < n; ++r) M(r, i) = mod64(M(r, i) + mulmod64(t, M(r, j), q), q);
    for (int c = 0; c < n; ++c) T(i, c) = mod64(T(i, c) + mulmod64(t, T(j, c), q), q);
  }
};

}  // namespace

MatZ minor_matrix(const MatZ& B, int i) {
  const int n = static_cast<int>(B.rows());
  if (i < 1 || i > n) throw Error("minor size out of range");
  auto S = subsets(n, i);
  MatZ out(S.size(), S.size());
  for (std::size_t r = 0; r < S.size(); ++r)
    for (std::size_t c = 0; c < S.size(); ++c) {
      MatZ sub(i, i);
      for (int x = 0; x < i; ++x)
        for (int y = 0; y < i; ++y) sub(x, y) = B(S[r][x], S[c][y]);
      out(r, c) = det(sub);
    }
  return out;
}

bool is_special_at(const MatZ& B, const Int& a0) {
  if (a0 == 0) throw Error("special at 0 is undefined");
  if (B.rows() != 4 || B.cols() != 4) throw Error("specialness is defined for quaternary forms");
  const Int a = abs(a0);
  if (a == 1) return true;
  Int mod = a;
  for (int i = 2; i <= 4; ++i) {
    MatZ m = minor_matrix(B, i);
    for (int r = 0; r < m.rows(); ++r)
      for (int c = 0; c < m.cols(); ++c)
        if (m(r, c) % mod != 0) return false;
    mod *= a;
  }
  return true;
}

bool is_special_at64(const std::array<i64, 16>& B, i64 a) {
  if (a < 1 || a > 1024) throw Error("machine specialness test needs 1 <= a <= 1024");
  if (a == 1) return true;
  static const std::vector<std::vector<int>> sets[3] = {subsets(4, 2), subsets(4, 3), subsets(4, 4)};
  i128 mod = a;
  i128 m[16];
  for (int i = 2; i <= 4; ++i) {
    for (int t = 0; t < 16; ++t) m[t] = static_cast<i128>(B[t]) % mod;
    auto at = [&](int r, int c) { return m[4 * r + c]; };
    for (const auto& rows : sets[i - 2])
      for (const auto& cols : sets[i - 2]) {
        i128 d = 0;
        if (i == 2) {
          d = at(rows[0], cols[0]) * at(rows[1], cols[1]) - at(rows[0], cols[1]) * at(rows[1], cols[0]);
        } else if (i == 3) {
          auto e = [&](int x, int y) { return at(rows[x], cols[y]); };
          d = e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1)) - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0)) +
              e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0));
        } else {
          for (int c = 0; c < 4; ++c) {
            i128 minor3 = 0;
            int o[3], k = 0;
            for (int y = 0; y < 4; ++y)
              if (y != c) o[k++] = y;
            auto e = [&](int x, int y) { return at(x + 1, o[y]); };
            minor3 = e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1)) - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0)) +
                     e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0));
            d += (c % 2 ? -1 : 1) * at(0, c) * (minor3 % mod);
          }
        }
        if (d % mod != 0) return false;
      }
    mod *= a;
  }
  return true;
}

bool is_special_at_p(const MatQ& B, const Int& p, int k) {
  if (B.rows() != 4 || B.cols() != 4) throw Error("specialness is defined for quaternary forms");
  auto S = [&](int i) { return subsets(4, i); };
  for (int i = 2; i <= 4; ++i) {
    auto sets = S(i);
    for (const auto& r : sets)
      for (const auto& c : sets) {
        MatQ sub(i, i);
        for (int x = 0; x < i; ++x)
          for (int y = 0; y < i; ++y) sub(x, y) = B(r[x], c[y]);
        Rat d = det(sub);
        if (d != 0 && valuation(d, p) < (i - 1) * k) return false;
      }
  }
  return true;
}

namespace {

// B == c l l^T mod p^k, by solving for c and l from a pivot of minimal valuation. M is reduced mod p^k.
bool rank_le1_core(const i64* M, int n, i64 p, int k) {
  const i64 q = pow_checked(p, k);
  auto val = [&](i64 x) { return x == 0 ? k : valuation64(x, p, k); };
  int vmin = k, pivot = -1;
  for (int t = 0; t < n * n; ++t) vmin = std::min(vmin, val(M[t]));
  if (vmin >= k) return true;
  for (int i = 0; i < n && pivot < 0; ++i)
    if (val(M[i * n + i]) == vmin) pivot = i;
  if (pivot < 0) return false;
  const i64 qr = pow_checked(p, k - vmin);
  const i64 pv = pow_checked(p, vmin);
  const i64 c = M[pivot * n + pivot];
  const i64 uinv = invmod64(mod64(c / pv, qr), qr);
  i64 l[16];
  for (int j = 0; j < n; ++j) l[j] = mulmod64(mod64(M[pivot * n + j] / pv, qr), uinv, qr);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      i64 expect = mulmod64(c, mulmod64(l[i], l[j], q), q);
      if (expect != M[i * n + j]) return false;
    }
  return true;
}

bool rank_le1_prime_power(const MatZ& B, i64 p, int k) {
  const i64 q = pow_checked(p, k);
  const int n = static_cast<int>(B.rows());
  if (n > 16) throw Error("rank test supports at most 16 variables");
  std::vector<i64> M(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M[i * n + j] = reduce(B(i, j), q);
  return rank_le1_core(M.data(), n, p, k);
}

int case_tag_of(const std::vector<JordanBlock>& blocks) {
  std::vector<int> sizes;
  for (const auto& b : blocks) sizes.push_back(b.size);
  if (sizes == std::vector<int>{1, 1, 1, 1}) return 1;
  if (sizes == std::vector<int>{2, 1, 1}) return 2;
  if (sizes == std::vector<int>{1, 1, 2}) return 3;
  if (sizes == std::vector<int>{2, 2}) return 4;
  if (sizes == std::vector<int>{1, 2, 1}) return 5;
  return 0;
}

}  // namespace

bool rank_le1_mod(const MatZ& B, const Int& m) {
  if (m == 0) throw Error("modulus must be positive");
  for (const auto& [p, k] : factorize(abs(m)))
    if (!rank_le1_prime_power(B, p.get_si(), k)) return false;
  return true;
}

bool rank_le1_mod64(const std::array<i64, 16>& B, i64 p, int k) {
  const i64 q = pow_checked(p, k);
  i64 M[16];
  for (int t = 0; t < 16; ++t) M[t] = mod64(B[t], q);
  return rank_le1_core(M, 4, p, k);
}

JordanDecomposition jordan_decompose(const MatZ& B, const Int& P, int N) {
  if (N < 1) throw Error("precision must be positive");
  const int n = static_cast<int>(B.rows());
  ModWork w;
  w.p = P.get_si();
  w.N = N;
  w.q = pow_checked(w.p, N);
  w.M = Mat64(n, n);
  w.T = Mat64::Identity(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) w.M(i, j) = reduce(B(i, j), w.q);

  JordanDecomposition d;
  d.p = w.p;
  d.precision = N;
  struct Item {
    int start, size, exp;
  };
  std::vector<Item> items;
  int k = 0;
  while (k < n) {
    int v = N;
    for (int i = k; i < n; ++i)
      for (int j = k; j < n; ++j) v = std::min(v, w.val(w.M(i, j)));
    if (v >= N) {
      for (int i = k; i < n; ++i) items.push_back({i, 1, N});
      d.degenerate = true;
      break;
    }
    int diag = -1;
    for (int i = k; i < n && diag < 0; ++i)
      if (w.val(w.M(i, i)) == v) diag = i;
    const i64 pv = pow_checked(w.p, v), qr = pow_checked(w.p, N - v);
    if (diag >= 0) {
      w.swap_coords(k, diag);
      const i64 uinv = invmod64(mod64(w.M(k, k) / pv, qr), qr);
      for (int j = k + 1; j < n; ++j) {
        const i64 t = mulmod64(mod64(w.M(j, k) / pv, qr), uinv, qr);
        w.add(j, k, -t);
      }
      items.push_back({k, 1, v});
      ++k;
      continue;
    }
    int bi = -1, bj = -1;
    for (int i = k; i < n && bi < 0; ++i)
      for (int j = i + 1; j < n; ++j)
        if (w.val(w.M(i, j)) == v) {
          bi = i;
          bj = j;
          break;
        }
    if (w.p != 2) {
      w.add(bi, bj, 1);
      continue;
    }
    w.swap_coords(k, bi);
    w.swap_coords(k + 1, bj);
    const i64 a = mod64(w.M(k, k) / pv, qr), b = mod64(w.M(k, k + 1) / pv, qr), c = mod64(w.M(k + 1, k + 1) / pv, qr);
    const i64 dinv = invmod64(mod64(mulmod64(a, c, qr) - mulmod64(b, b, qr), qr), qr);
    for (int l = k + 2; l < n; ++l) {
      const i64 x0 = mod64(w.M(l, k) / pv, qr), x1 = mod64(w.M(l, k + 1) / pv, qr);
      // (t0, t1) = (x0, x1) * [[c, -b], [-b, a]] / det
      const i64 t0 = mulmod64(mod64(mulmod64(x0, c, qr) - mulmod64(x1, b, qr), qr), dinv, qr);
      const i64 t1 = mulmod64(mod64(mulmod64(x1, a, qr) - mulmod64(x0, b, qr), qr), dinv, qr);
      w.add(l, k, -t0);
      w.add(l, k + 1, -t1);
    }
    items.push_back({k, 2, v});
    k += 2;
  }

  // Order by exponent, largest first; on ties blocks come first.
  std::vector<int> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
    if (items[x].exp != items[y].exp) return items[x].exp > items[y].exp;
    return items[x].size > items[y].size;
  });
  std::vector<int> perm;
  for (int idx : order)
    for (int s = 0; s < items[idx].size; ++s) perm.push_back(items[idx].start + s);
  Mat64 M2(n, n), T2(n, n);
  for (int i = 0; i < n; ++i) {
    T2.row(i) = w.T.row(perm[i]);
    for (int j = 0; j < n; ++j) M2(i, j) = w.M(perm[i], perm[j]);
  }
  d.transform = T2;
  d.reduced = M2;
  int pos = 0, slot = 0;
  for (int idx : order) {
    const Item& it = items[idx];
    JordanBlock blk;
    blk.size = it.size;
    blk.exp = it.exp;
    if (it.exp < N) {
      const i64 pv = pow_checked(w.p, it.exp), qr = pow_checked(w.p, N - it.exp);
      for (int r = 0; r < it.size; ++r)
        for (int c = 0; c < it.size; ++c) blk.unit[2 * r + c] = mod64(M2(pos + r, pos + c) / pv, qr);
    }
    for (int s = 0; s < it.size && slot < 4; ++s) d.exps[slot++] = it.exp;
    d.blocks.push_back(blk);
    pos += it.size;
  }
  d.case_tag = n == 4 ? case_tag_of(d.blocks) : 0;
  return d;
}

bool rank_le2_mod(const MatZ& B, const Int& m) {
  if (m == 0) throw Error("modulus must be positive");
  if (B.rows() != 4) throw Error("rank tests are defined for quaternary forms");
  for (const auto& [p, k] : factorize(abs(m))) {
    JordanDecomposition d = jordan_decompose(B, p, k);
    int threshold_exp = 0;
    switch (d.case_tag) {
      case 1:
      case 3:
        threshold_exp = d.exps[1];
        break;
      case 2:
      case 4:
        threshold_exp = d.exps[0];
        break;
      case 5:
        threshold_exp = d.exps[2];
        break;
      default:
        throw Error("unexpected Jordan shape");
    }
    if (threshold_exp < k) return false;
  }
  return true;
}

bool rank_le1_mod_jordan(const MatZ& B, const Int& m) {
  if (m == 0) throw Error("modulus must be positive");
  for (const auto& [p, k] : factorize(abs(m))) {
    JordanDecomposition d = jordan_decompose(B, p, k);
    int below = 0;
    for (const auto& blk : d.blocks)
      if (blk.exp < k) {
        if (blk.size == 2) return false;
        ++below;
      }
    if (below > 1) return false;
  }
  return true;
}

bool witness_holds(const MatZ& B, const SpecialWitness& w) {
  MatZ scaled(B.rows(), B.cols());
  for (int i = 0; i < B.rows(); ++i)
    for (int j = 0; j < B.cols(); ++j) {
      if (B(i, j) % w.a1 != 0) return false;
      scaled(i, j) = B(i, j) / w.a1;
    }
  return rank_le1_mod(scaled, w.a2) && rank_le2_mod(scaled, w.a2 * w.a3);
}

WitnessResult special_witness_unchecked(const MatZ& B, const Int& a0) {
  if (a0 == 0) throw Error("special at 0 is undefined");
  WitnessResult res;
  const Int a = abs(a0);
  for (const auto& [P, alpha] : factorize(a)) {
    const i64 p = P.get_si();
    int N = 3 * alpha + 8;
    while (N > 1) {
      try {
        pow_checked(p, N);
        break;
      } catch (const Error&) {
        --N;
      }
    }
    if (N < 2 * alpha + 1) {
      res.diagnostics = "precision exhausted at p=" + P.get_str();
      return res;
    }
    JordanDecomposition d = jordan_decompose(B, P, N);
    const auto& s = d.exps;
    const int lo1 = std::max({0, alpha - s[2], 2 * alpha - s[1] - s[2]});
    const int hi1 = std::min(s[3], (2 * alpha) / 3);
    bool found = false;
    for (int e1 = lo1; e1 <= hi1 && !found; ++e1) {
      const int lo2 = std::max({0, alpha - s[1], 2 * e1 - alpha});
      const int hi2 = std::min(e1 - alpha + s[2], e1 / 2);
      if (lo2 <= hi2) {
        res.witness.records.push_back({P, e1, lo2});
        res.witness.a1 *= ipow(P, e1);
        res.witness.a2 *= ipow(P, alpha - 2 * e1 + lo2);
        res.witness.a3 *= ipow(P, e1 - 2 * lo2);
        found = true;
      }
    }
    if (!found) {
      res.diagnostics = "empty exponent window at p=" + P.get_str() + " with exponents (" + std::to_string(s[0]) + "," +
                        std::to_string(s[1]) + "," + std::to_string(s[2]) + "," + std::to_string(s[3]) +
                        "), case " + std::to_string(d.case_tag);
      return res;
    }
  }
  if (!witness_holds(B, res.witness)) {
    res.diagnostics = "witness failed verification";
    return res;
  }
  res.ok = true;
  return res;
}

WitnessResult special_witness(const MatZ& B, const Int& a) {
  if (!is_special_at(B, a)) throw Error("form is not special at the given integer");
  return special_witness_unchecked(B, a);
}

namespace {

// Exact basis changes over Z_(p): rows of T give the new basis.
struct ExactWork {
  Int p;
  MatQ A, B, T;

  int val(const Rat& x) const { return x == 0 ? (1 << 20) : valuation(x, p); }

  void swap_coords(int i, int j) {
    if (i == j) return;
    for (MatQ* m : {&A, &B}) {
      m->row(i).swap(m->row(j));
      m->col(i).swap(m->col(j));
    }
    T.row(i).swap(T.row(j));
  }

  void add(int i, int j, const Rat& t) {
    if (t == 0) return;
    for (MatQ* m : {&A, &B}) {
      m->row(i) += t * m->row(j);
      m->col(i) += t * m->col(j);
    }
    T.row(i) += t * T.row(j);
  }

  // Diagonalize the symmetric form `which` on coordinates [lo, hi).
  void diagonalize(bool onB, int lo, int hi) {
    MatQ& M = onB ? B : A;
    for (int k = lo; k < hi; ++k) {
      while (true) {
        int v = 1 << 20;
        for (int i = k; i < hi; ++i)
          for (int j = k; j < hi; ++j) v = std::min(v, val(M(i, j)));
        if (v >= (1 << 20)) return;
        int diag = -1;
        for (int i = k; i < hi && diag < 0; ++i)
          if (val(M(i, i)) == v) diag = i;
        if (diag < 0) {
          for (int i = k; i < hi && diag < 0; ++i)
            for (int j = i + 1; j < hi; ++j)
              if (val(M(i, j)) == v) {
                add(i, j, 1);
                diag = -2;
                break;
              }
          continue;
        }
        swap_coords(k, diag);
        for (int j = k + 1; j < hi; ++j) add(j, k, -M(j, k) / M(k, k));
        break;
      }
    }
  }
};

}  // namespace

SpecializeResult specialize(const BinaryForm& f, const QuadPair& pair, const Int& p) {
  SpecializeResult res;
  if (p == 2 || !is_prime(p)) throw Error("specialize supports odd primes only");
  if (pair.dim() != 4 || f.degree() != 4) throw Error("specialize needs quaternary pairs and quartic forms");
  if (!arises_for(f, pair)) {
    res.failed_step = "pair does not arise for f";
    return res;
  }
  const int alpha = valuation(f[0], p);
  MatZ B3 = pair.B * Int(3);
  ExactWork w{p, to_rat(pair.A), to_rat(B3), MatQ::Identity(4, 4)};
  if (alpha == 0 || is_special_at_p(w.B, p, alpha)) {
    res.ok = true;
    res.already_special = true;
    res.pair = {w.A, w.B};
    return res;
  }
  // Jordan form of 3B, exponents sorted decreasingly.
  w.diagonalize(true, 0, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (w.val(w.B(j, j)) > w.val(w.B(i, i))) w.swap_coords(i, j);
  int b[4];
  for (int i = 0; i < 4; ++i) b[i] = std::min(w.val(w.B(i, i)), 1 << 20);
  const int c = alpha - b[2] - b[3];
  res.c = c;
  if (c < 1 || c > alpha || b[0] < alpha + c || b[1] < alpha + c) {
    res.failed_step = "exponent c from the second congruence";
    return res;
  }
  // Diagonalize the upper-left block of A; this keeps 3B block diagonal.
  w.diagonalize(false, 0, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      if (w.val(w.A(i, j)) < c) {
        res.failed_step = "upper-left block of A divisible by p^c";
        return res;
      }
  const Rat r = rpow(Rat(p), -c);
  MatQ A2(4, 4), B2(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const bool lo_i = i < 2, lo_j = j < 2;
      Rat scale = lo_i && lo_j ? r : (!lo_i && !lo_j ? Rat(1) / r : Rat(1));
      A2(i, j) = w.A(i, j) * scale;
      B2(i, j) = w.B(i, j) * scale;
    }
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (w.val(A2(i, j)) < 0 || w.val(B2(i, j)) < 0) {
        res.failed_step = "output is not p-integral";
        return res;
      }
  if (!is_special_at_p(B2, p, alpha)) {
    res.failed_step = "output is not special";
    return res;
  }
  res.ok = true;
  res.pair = {A2, B2};
  return res;
}

}  // namespace twosel
