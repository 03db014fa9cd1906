#pragma once

#include "twosel/pairs.hpp"

#include <array>
#include <optional>

namespace twosel {

// i x i minors of B, rows and columns indexed by subsets in lexicographic order.
MatZ minor_matrix(const MatZ& B, int i);

// Wedge^i B == 0 mod a^(i-1) for i = 2, 3, 4.
bool is_special_at(const MatZ& B, const Int& a);
// Machine-integer version for 1 <= a <= 1024, entries row-major.
bool is_special_at64(const std::array<i64, 16>& B, i64 a);
// Same condition at p^k for a matrix with p-integral rational entries.
bool is_special_at_p(const MatQ& B, const Int& p, int k);

// B == c * l l^T mod p^k for every p^k || m.
bool rank_le1_mod(const MatZ& B, const Int& m);
// Same test for a quaternary form with machine entries, row-major, at p^k.
bool rank_le1_mod64(const std::array<i64, 16>& B, i64 p, int k);

struct JordanBlock {
  int size = 1;  // 1 or 2 (p = 2 only)
  int exp = 0;   // == precision means "zero at this precision"
  std::array<i64, 4> unit{};  // u, or the 2x2 block (b11, b12, b21, b22) divided by p^exp
};

struct JordanDecomposition {
  i64 p = 0;
  int precision = 0;
  int case_tag = 0;               // 1..5 for n = 4
  std::array<int, 4> exps{};      // b1 >= b2 >= b3 >= b4, one entry per dimension
  std::vector<JordanBlock> blocks;  // in shape order
  Mat64 transform;                // rows: new basis in old coordinates, mod p^precision
  Mat64 reduced;                  // transform * B * transform^T mod p^precision
  bool degenerate = false;        // some exponent reached the precision
};

JordanDecomposition jordan_decompose(const MatZ& B, const Int& p, int precision);

// Thresholds on the Jordan exponents: b2 in cases 1 and 3, b1 in cases 2 and 4, b3 in case 5.
bool rank_le2_mod(const MatZ& B, const Int& m);
// At most one Jordan exponent below nu_p(m), and it is not a 2x2 block.
bool rank_le1_mod_jordan(const MatZ& B, const Int& m);

struct WitnessRecord {
  Int p;
  int e1 = 0, e2 = 0;
};

struct SpecialWitness {
  std::vector<WitnessRecord> records;
  Int a1 = 1, a2 = 1, a3 = 1;
};

struct WitnessResult {
  bool ok = false;
  SpecialWitness witness;
  std::string diagnostics;
};

// Builds and verifies the (a1, a2, a3) decomposition without checking that B is special at a.
WitnessResult special_witness_unchecked(const MatZ& B, const Int& a);
// Throws unless B is special at a.
WitnessResult special_witness(const MatZ& B, const Int& a);
bool witness_holds(const MatZ& B, const SpecialWitness& w);

struct SpecializeResult {
  bool ok = false;
  std::string failed_step;
  int c = 0;
  bool already_special = false;
  RationalPair pair;  // entries are p-integral
};

// Odd p only.
SpecializeResult specialize(const BinaryForm& f, const QuadPair& pair, const Int& p);

}  // namespace twosel
