#pragma once

#include <gmpxx.h>
#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace Eigen {

template <>
struct NumTraits<mpz_class> : GenericNumTraits<mpz_class> {
  using Real = mpz_class;
  using NonInteger = mpq_class;
  using Nested = mpz_class;
  using Literal = mpz_class;
  enum {
    IsComplex = 0,
    IsInteger = 1,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 6,
    AddCost = 20,
    MulCost = 40
  };
  static inline Real epsilon() { return 0; }
  static inline Real dummy_precision() { return 0; }
  static inline int digits10() { return 0; }
};

template <>
struct NumTraits<mpq_class> : GenericNumTraits<mpq_class> {
  using Real = mpq_class;
  using NonInteger = mpq_class;
  using Nested = mpq_class;
  using Literal = mpq_class;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 6,
    AddCost = 40,
    MulCost = 80
  };
  static inline Real epsilon() { return 0; }
  static inline Real dummy_precision() { return 0; }
  static inline int digits10() { return 0; }
};

}  // namespace Eigen

namespace twosel {

using Int = mpz_class;
using Rat = mpq_class;
using i64 = std::int64_t;
using i128 = __int128;

template <class Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatZ = Mat<Int>;
using MatQ = Mat<Rat>;
using VecZ = Vec<Int>;
using VecQ = Vec<Rat>;
using Mat64 = Mat<i64>;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --- scalar helpers -------------------------------------------------------

Int ipow(const Int& base, unsigned long e);
Rat rpow(const Rat& base, long e);
i64 ipow64(i64 base, int e);

// Largest k with p^k | n; returns `cap` for n == 0.
int valuation(const Int& n, const Int& p, int cap = 1 << 20);
int valuation(const Rat& q, const Int& p, int cap = 1 << 20);
int valuation64(i64 n, i64 p, int cap = 64);

bool is_square(const Int& n);
Int isqrt(const Int& n);
i64 isqrt64(i64 n);
bool is_square64(i64 n, i64* root = nullptr);

bool is_prime(const Int& n);
// Prime factorization by trial division plus a primality check on the cofactor.
std::vector<std::pair<Int, int>> factorize(const Int& n);
std::vector<Int> prime_divisors(const Int& n);
std::vector<Int> divisors(const Int& n);
std::vector<int> primes_up_to(int n);

i64 mod64(i64 a, i64 m);
i64 mulmod64(i64 a, i64 b, i64 m);
i64 invmod64(i64 a, i64 m);  // throws if not invertible
int legendre(i64 a, i64 p);  // p odd prime

bool is_integral(const Rat& q);
bool all_integral(const MatQ& m);
MatQ to_rat(const MatZ& m);
MatZ to_int(const MatQ& m);  // throws if some entry is not integral
MatZ from64(const Mat64& m);

// --- exact linear algebra (entries must not be Eigen expressions) ---------

Int det(const MatZ& m);  // Bareiss fraction-free elimination
Rat det(const MatQ& m);
MatQ inverse(const MatQ& m);  // throws on singular input
// Solve x * m = v for row vector x; returns false if m is singular.
bool solve_left(const MatQ& m, const VecQ& v, VecQ& x);
int rank(const MatQ& m);

// --- univariate polynomials, coefficient i of x^i -------------------------

using PolyQ = std::vector<Rat>;
using PolyZ = std::vector<Int>;

void trim(PolyQ& p);
PolyQ poly_mul(const PolyQ& a, const PolyQ& b);
PolyQ poly_add(const PolyQ& a, const PolyQ& b);
PolyQ poly_divmod(const PolyQ& a, const PolyQ& b, PolyQ* rem);
PolyQ poly_derivative(const PolyQ& a);
PolyQ poly_gcd(const PolyQ& a, const PolyQ& b);  // monic
Rat poly_eval(const PolyQ& p, const Rat& x);
Rat resultant(const PolyQ& a, const PolyQ& b);  // Sylvester determinant

std::string to_string(const Int& n);
std::string to_string(const Rat& q);

}  // namespace twosel
