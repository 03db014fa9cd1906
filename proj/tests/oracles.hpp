#pragma once

// Independent reference implementations used only by tests.

#include "twosel/arith.hpp"

#include <cstdint>
#include <deque>
#include <unordered_set>
#include <vector>

namespace oracle {

using twosel::i64;

// Symmetric 4x4 matrices over Z/q encoded by their 10 upper-triangular entries in base q.
inline const int kPairs[10][2] = {{0, 0}, {0, 1}, {0, 2}, {0, 3}, {1, 1}, {1, 2}, {1, 3}, {2, 2}, {2, 3}, {3, 3}};

inline std::uint64_t encode(const i64 m[4][4], i64 q) {
  std::uint64_t code = 0;
  for (int t = 9; t >= 0; --t) code = code * q + static_cast<std::uint64_t>(((m[kPairs[t][0]][kPairs[t][1]] % q) + q) % q);
  return code;
}

inline void decode(std::uint64_t code, i64 q, i64 m[4][4]) {
  for (int t = 0; t < 10; ++t) {
    i64 v = static_cast<i64>(code % q);
    code /= q;
    m[kPairs[t][0]][kPairs[t][1]] = m[kPairs[t][1]][kPairs[t][0]] = v;
  }
}

inline twosel::MatZ to_matz(const i64 m[4][4]) {
  twosel::MatZ out(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out(i, j) = static_cast<long>(m[i][j]);
  return out;
}

// All c * l l^T mod q by brute force over c and l.
inline std::unordered_set<std::uint64_t> rank1_set(i64 q) {
  std::unordered_set<std::uint64_t> s;
  i64 m[4][4];
  for (i64 c = 0; c < q; ++c)
    for (i64 code = 0; code < q * q * q * q; ++code) {
      i64 l[4], t = code;
      for (int i = 0; i < 4; ++i) l[i] = t % q, t /= q;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) m[i][j] = c * l[i] % q * l[j] % q;
      s.insert(encode(m, q));
    }
  return s;
}

// Orbit closure under GL_4(Z/q) of the forms supported on the first `dim` coordinates.
inline std::vector<char> orbit_closure(i64 q, i64 p, int dim) {
  std::uint64_t total = 1;
  for (int i = 0; i < 10; ++i) total *= q;
  std::vector<char> seen(total, 0);
  std::deque<std::uint64_t> queue;
  i64 m[4][4];
  std::uint64_t seeds = 1;
  for (int i = 0; i < dim * (dim + 1) / 2; ++i) seeds *= q;
  for (std::uint64_t s = 0; s < seeds; ++s) {
    for (auto& row : m)
      for (auto& x : row) x = 0;
    std::uint64_t t = s;
    for (int i = 0; i < dim; ++i)
      for (int j = i; j < dim; ++j) {
        m[i][j] = m[j][i] = static_cast<i64>(t % q);
        t /= q;
      }
    std::uint64_t code = encode(m, q);
    if (!seen[code]) {
      seen[code] = 1;
      queue.push_back(code);
    }
  }
  std::vector<i64> units;
  for (i64 u = 1; u < q; ++u)
    if (u % p != 0) units.push_back(u);
  while (!queue.empty()) {
    std::uint64_t code = queue.front();
    queue.pop_front();
    decode(code, q, m);
    auto push = [&](const i64 x[4][4]) {
      std::uint64_t c = encode(x, q);
      if (!seen[c]) {
        seen[c] = 1;
        queue.push_back(c);
      }
    };
    i64 x[4][4];
    // transvections e_i += e_j
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        if (i == j) continue;
        for (int r = 0; r < 4; ++r)
          for (int c = 0; c < 4; ++c) x[r][c] = m[r][c];
        for (int c = 0; c < 4; ++c) x[i][c] = (x[i][c] + x[j][c]) % q;
        for (int r = 0; r < 4; ++r) x[r][i] = (x[r][i] + x[r][j]) % q;
        push(x);
      }
    // unit scaling of one coordinate
    for (i64 u : units) {
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) x[r][c] = m[r][c];
      for (int c = 0; c < 4; ++c) x[0][c] = x[0][c] * u % q;
      for (int r = 0; r < 4; ++r) x[r][0] = x[r][0] * u % q;
      push(x);
    }
  }
  return seen;
}

}  // namespace oracle
