#include "twosel/selmer.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <numeric>
#include <queue>
#include <set>

namespace twosel {

namespace {

using cld = std::complex<long double>;

// --- numerics ----------------------------------------------------------------

// Roots of sum c[i] x^i with c.back() != 0: Aberth iteration, then Newton polishing.
std::vector<cld> poly_roots(const std::vector<long double>& c) {
  const int n = static_cast<int>(c.size()) - 1;
  if (n < 1) return {};
  std::vector<cld> a(n + 1);
  for (int i = 0; i <= n; ++i) a[i] = c[i] / c[n];
  long double radius = 0;
  for (int i = 0; i < n; ++i) radius = std::max(radius, std::pow(std::abs(a[i].real()), 1.0L / (n - i)));
  radius = std::max<long double>(radius, 1e-6L);
  auto eval = [&](cld z, cld& d) {
    cld v = a[n];
    d = 0;
    for (int i = n - 1; i >= 0; --i) {
      d = d * z + v;
      v = v * z + a[i];
    }
    return v;
  };
  std::vector<cld> z(n);
  for (int k = 0; k < n; ++k) z[k] = std::polar(radius, 0.4L + 2.0L * static_cast<long double>(M_PI) * k / n);
  for (int it = 0; it < 500; ++it) {
    long double step = 0;
    for (int k = 0; k < n; ++k) {
      cld d;
      cld v = eval(z[k], d);
      if (v == cld(0)) continue;
      cld ratio = v / d;
      cld sum = 0;
      for (int j = 0; j < n; ++j)
        if (j != k) sum += 1.0L / (z[k] - z[j]);
      cld w = ratio / (1.0L - ratio * sum);
      z[k] -= w;
      step = std::max(step, std::abs(w) / (1 + std::abs(z[k])));
    }
    if (step < 1e-16L) break;
  }
  for (cld& r : z)
    for (int it = 0; it < 3; ++it) {
      cld d;
      cld v = eval(r, d);
      if (d == cld(0)) break;
      r -= v / d;
    }
  return z;
}

// Roots of f(x, 1); requires f[0] != 0.
std::vector<cld> form_roots(const BinaryForm& f) {
  const int n = f.degree();
  std::vector<long double> c(n + 1);
  for (int i = 0; i <= n; ++i) c[n - i] = static_cast<long double>(f[i].get_d());
  return poly_roots(c);
}

using Quad = std::array<long double, 3>;

// Q(p x + q y, r x + s y)
Quad quad_substitute(const Quad& Q, long double p, long double q, long double r, long double s) {
  const long double A = Q[0], B = Q[1], C = Q[2];
  return {A * p * p + B * p * r + C * r * r, 2 * A * p * q + B * (p * s + q * r) + 2 * C * r * s,
          A * q * q + B * q * s + C * s * s};
}

Quad covariant_from_roots(long double a, const std::vector<cld>& roots) {
  Quad Q{0, 0, 0};
  const int n = static_cast<int>(roots.size());
  for (int i = 0; i < n; ++i) {
    cld prod = a;
    for (int j = 0; j < n; ++j)
      if (j != i) prod *= roots[i] - roots[j];
    const long double w = 1.0L / std::abs(prod);
    Q[0] += w;
    Q[1] += -2 * w * roots[i].real();
    Q[2] += w * std::norm(roots[i]);
  }
  return Q;
}

long double quad_det(const Quad& Q) { return Q[0] * Q[2] - Q[1] * Q[1] / 4; }

// --- p-adic helpers ----------------------------------------------------------

bool qp_square(const Int& n, const Int& p) {
  if (n == 0) return true;
  const int v = valuation(n, p);
  if (v % 2) return false;
  Int u = n;
  for (int i = 0; i < v; ++i) u /= p;
  if (p == 2) return mpz_fdiv_ui(u.get_mpz_t(), 8) == 1;
  return mpz_legendre(u.get_mpz_t(), p.get_mpz_t()) == 1;
}

// Coefficients of g(x0 + h t), coefficient i of t^i.
PolyZ taylor_shift(const PolyZ& g, const Int& x0, const Int& h) {
  PolyZ c = g;
  const int n = static_cast<int>(c.size()) - 1;
  for (int i = 0; i < n; ++i)
    for (int j = n - 1; j >= i; --j) c[j] += x0 * c[j + 1];
  Int hk = 1;
  for (int k = 0; k <= n; ++k) {
    c[k] *= hk;
    hk *= h;
  }
  return c;
}

// g(t) = sum C_k t^k has a root in Z_p: the Newton polygon starts with a single segment of slope <= 0,
// or classical Hensel applies.
bool disk_has_root(const PolyZ& C, const Int& p, int* v0_out = nullptr, int* v1_out = nullptr) {
  if (C.size() < 2 || C[1] == 0) return false;
  const int v0 = C[0] == 0 ? INT_MAX : valuation(C[0], p);
  const int v1 = valuation(C[1], p);
  bool dominant = v0 >= v1;
  for (std::size_t k = 2; k < C.size() && dominant; ++k)
    if (C[k] != 0 && valuation(C[k], p) <= v1) dominant = false;
  if (!dominant && !(v0 != INT_MAX && v0 > 2 * v1)) return false;
  if (v0_out) *v0_out = v0;
  if (v1_out) *v1_out = v1;
  return true;
}

struct DiskHit {
  Int center;
  int n = 0;
  std::string kind;
  int vf = 0, vdf = 0;
};

// Recursive search over disks x0 + p^n Z_p for a point where every polynomial is a square.
// On a disk, g(x0 + p^n t) = sum C_k t^k has constant square class once v(C_k) >= v(C_0) + 1 (p odd) or + 3 (p = 2)
// for all k >= 1, and has a root once disk_has_root holds. Every disk satisfies one of these before n exceeds
// the separation of the roots, which is at most v_p(disc) / 2 for roots near Z_p; the bound used is 2 v_p(disc) + 4.
class DiskSearch {
 public:
  DiskSearch(std::vector<PolyZ> polys, Int p, int bound)
      : polys_(std::move(polys)), p_(std::move(p)), thresh_(p_ == 2 ? 3 : 1), bound_(bound) {
    if (p_ > 10000000) throw Error("prime too large for residue search: " + p_.get_str());
  }

  bool run(const Int& x0, int n, DiskHit& hit) {
    max_depth = std::max(max_depth, n);
    if (n > bound_) throw Error("local search exceeded its depth bound at p = " + p_.get_str());
    const Int h = ipow(p_, n);
    bool center_ok = true, open = false, zero = false;
    int roots = 0, vf = 0, vdf = 0;
    for (const PolyZ& g : polys_) {
      PolyZ C = taylor_shift(g, x0, h);
      if (C[0] == 0) {
        // a zero at the center constrains only the center itself
        zero = true;
        if (disk_has_root(C, p_)) ++roots;
        else open = true;
        continue;
      }
      const bool sq = qp_square(C[0], p_);
      if (!sq) center_ok = false;
      const int v0 = valuation(C[0], p_);
      int vmin = INT_MAX;
      for (std::size_t k = 1; k < C.size(); ++k)
        if (C[k] != 0) vmin = std::min(vmin, valuation(C[k], p_));
      if (vmin != INT_MAX && vmin < v0 + thresh_) {
        if (disk_has_root(C, p_, &vf, &vdf)) {
          ++roots;
        } else {
          open = true;
        }
      } else if (!sq) {
        return false;
      }
    }
    if (center_ok) {
      hit = {x0, n, zero ? "zero" : "square", 0, 0};
      return true;
    }
    if (!open && roots <= 1) {
      hit = {x0, n, "hensel-root", vf, vdf};
      return true;
    }
    for (Int s = 0; s < p_; ++s)
      if (run(x0 + s * h, n + 1, hit)) return true;
    return false;
  }

  int max_depth = 0;

 private:
  std::vector<PolyZ> polys_;
  Int p_;
  int thresh_;
  int bound_;
};

PolyZ patch_poly(const BinaryForm& f, int patch) {
  const int n = f.degree();
  PolyZ c(n + 1);
  for (int i = 0; i <= n; ++i) c[patch == 1 ? n - i : i] = f[i];
  return c;
}

Int form_discriminant(const BinaryForm& f) {
  if (f.degree() == 4) {
    InvariantData inv = invariants(f);
    return inv.Delta.get_num();
  }
  return discriminant(f);
}

BinaryForm form_product(const BinaryForm& f, const BinaryForm& g) {
  std::vector<Int> c(f.coeffs.size() + g.coeffs.size() - 1, Int(0));
  for (std::size_t i = 0; i < f.coeffs.size(); ++i)
    for (std::size_t j = 0; j < g.coeffs.size(); ++j) c[i + j] += f[i] * g[j];
  return BinaryForm(c);
}

// Some rational point where f > 0, searched between the real roots of f(x, 1).
std::optional<std::pair<Int, Int>> positive_point(const BinaryForm& f) {
  if (f[0] > 0) return std::make_pair(Int(1), Int(0));
  std::vector<long double> xs{0};
  if (f[0] != 0) {
    std::vector<long double> real;
    for (const cld& r : form_roots(f))
      if (std::abs(r.imag()) <= 1e-9L * (1 + std::abs(r))) real.push_back(r.real());
    std::sort(real.begin(), real.end());
    for (std::size_t i = 0; i + 1 < real.size(); ++i) xs.push_back((real[i] + real[i + 1]) / 2);
  }
  for (long double m : xs)
    for (int k = 0; k < 64; ++k) {
      Int y = ipow(Int(2), k);
      Int x(std::to_string(static_cast<long long>(std::llroundl(m * std::ldexp(1.0L, k)))));
      if (f.eval(x, y) > 0) return std::make_pair(x, y);
    }
  return std::nullopt;
}

}  // namespace

// --- local solubility --------------------------------------------------------

int sturm_real_roots(const PolyQ& g0) {
  PolyQ g = g0;
  trim(g);
  if (g.size() <= 1) return 0;
  std::vector<PolyQ> seq{g, poly_derivative(g)};
  while (seq.back().size() > 1) {
    PolyQ r;
    poly_divmod(seq[seq.size() - 2], seq.back(), &r);
    trim(r);
    if (r.empty()) break;
    for (Rat& c : r) c = -c;
    seq.push_back(r);
  }
  auto changes = [&](bool at_plus) {
    int count = 0, last = 0;
    for (const PolyQ& s : seq) {
      int sg = sgn(s.back());
      if (!at_plus && (s.size() - 1) % 2 == 1) sg = -sg;
      if (sg == 0) continue;
      if (last != 0 && sg != last) ++count;
      last = sg;
    }
    return count;
  };
  return changes(false) - changes(true);
}

SolubilityCertificate real_certificate(const BinaryForm& f) {
  if (f.degree() != 4) throw Error("quartic form expected");
  if (invariants(f).Delta == 0) throw Error("singular form");
  SolubilityCertificate c;
  c.p = 0;
  if (f[0] >= 0) {
    c.soluble = true;
    c.kind = f[0] > 0 ? "positive-value" : "real-root";
    c.x = 1;
    c.y = 0;
    return c;
  }
  const int roots = sturm_real_roots(f.dehomogenize());
  c.val_f = roots;
  if (roots == 0) {
    c.soluble = false;
    c.kind = "negative-definite";
    return c;
  }
  c.soluble = true;
  c.kind = "real-root";
  if (auto pt = positive_point(f)) {
    c.kind = "positive-value";
    c.x = pt->first;
    c.y = pt->second;
  }
  return c;
}

bool real_soluble(const BinaryForm& f) { return real_certificate(f).soluble; }

SolubilityCertificate qp_soluble(const BinaryForm& f, const Int& p) {
  if (f.degree() != 4) throw Error("quartic form expected");
  const Int disc = form_discriminant(f);
  if (disc == 0) throw Error("singular form");
  SolubilityCertificate c;
  c.p = p;
  c.depth_bound = 2 * valuation(disc, p) + 4;
  for (int patch = 1; patch <= 2; ++patch) {
    DiskSearch search({patch_poly(f, patch)}, p, c.depth_bound);
    DiskHit hit;
    const bool found = search.run(0, patch == 1 ? 0 : 1, hit);
    c.depth = std::max(c.depth, search.max_depth);
    if (found) {
      c.soluble = true;
      c.kind = hit.kind;
      c.patch = patch;
      c.x = patch == 1 ? hit.center : Int(1);
      c.y = patch == 1 ? Int(1) : hit.center;
      c.precision = hit.n;
      c.val_f = hit.vf;
      c.val_df = hit.vdf;
      return c;
    }
  }
  c.soluble = false;
  c.kind = "exhausted";
  return c;
}

bool verify_certificate(const BinaryForm& f, const SolubilityCertificate& c) {
  if (c.p == 0) {
    if (c.kind == "positive-value") return c.soluble && f.eval(c.x, c.y) > 0;
    if (c.kind == "real-root") {
      if (f[0] == 0) return c.soluble;
      std::vector<cld> roots = form_roots(f);
      return c.soluble == std::any_of(roots.begin(), roots.end(), [](const cld& r) {
               return std::abs(r.imag()) <= 1e-9L * (1 + std::abs(r));
             });
    }
    if (c.kind == "negative-definite") {
      std::vector<cld> roots = form_roots(f);
      return !c.soluble && f[0] < 0 && std::none_of(roots.begin(), roots.end(), [](const cld& r) {
               return std::abs(r.imag()) <= 1e-12L * (1 + std::abs(r));
             });
    }
    return false;
  }
  if (!c.soluble) return c.kind == "exhausted";
  const Int& p = c.p;
  const Int v = f.eval(c.x, c.y);
  if (c.kind == "zero") return v == 0;
  if (c.kind == "square") {
    if (v == 0) return false;
    const int e = valuation(v, p);
    if (e % 2) return false;
    Int u = v;
    mpz_divexact(u.get_mpz_t(), u.get_mpz_t(), ipow(p, e).get_mpz_t());
    if (p == 2) return mpz_fdiv_ui(u.get_mpz_t(), 8) == 1;
    Int r;
    Int ex = (p - 1) / 2;
    Int um = u % p;
    if (um < 0) um += p;
    mpz_powm(r.get_mpz_t(), um.get_mpz_t(), ex.get_mpz_t(), p.get_mpz_t());
    return r == 1;
  }
  if (c.kind == "hensel-root") {
    const PolyZ C = taylor_shift(patch_poly(f, c.patch), c.patch == 1 ? c.x : c.y, ipow(p, c.precision));
    return disk_has_root(C, p);
  }
  return false;
}

bool locally_soluble(const BinaryForm& f, std::vector<SolubilityCertificate>* certs) {
  SolubilityCertificate r = real_certificate(f);
  if (certs) certs->push_back(r);
  if (!r.soluble) return false;
  const Int disc = form_discriminant(f);
  std::vector<Int> primes = prime_divisors(6 * disc);
  for (const Int& p : primes) {
    SolubilityCertificate c = qp_soluble(f, p);
    if (certs) certs->push_back(c);
    if (!c.soluble) return false;
  }
  return true;
}

bool qp_simultaneous_squares(const std::vector<BinaryForm>& forms, const Int& p, int depth_bound) {
  for (int patch = 1; patch <= 2; ++patch) {
    std::vector<PolyZ> polys;
    for (const BinaryForm& f : forms) polys.push_back(patch_poly(f, patch));
    DiskSearch search(polys, p, depth_bound);
    DiskHit hit;
    if (search.run(0, patch == 1 ? 0 : 1, hit)) return true;
  }
  return false;
}

bool has_rational_linear_factor(const BinaryForm& f) {
  const int n = f.degree();
  if (f[0] == 0 || f[n] == 0) return true;
  std::vector<Int> dens = divisors(f[0]);
  for (const cld& r : form_roots(f)) {
    if (std::abs(r.imag()) > 1e-6L * (1 + std::abs(r))) continue;
    for (const Int& q : dens) {
      const long double t = r.real() * static_cast<long double>(q.get_d());
      if (std::abs(t) > 1e17L) continue;
      const long long m = std::llroundl(t);
      for (long long k = m - 1; k <= m + 1; ++k)
        if (f.eval(Int(std::to_string(k)), q) == 0) return true;
    }
  }
  return false;
}

// --- GL2(Z) reduction --------------------------------------------------------

BinaryForm substitute(const BinaryForm& f, const std::array<Int, 4>& g) {
  const int n = f.degree();
  // powers of (p x + q y) and (r x + s y); entry j is the coefficient of x^(k-j) y^j
  std::vector<std::vector<Int>> px(n + 1), py(n + 1);
  px[0] = py[0] = {Int(1)};
  auto mul = [](const std::vector<Int>& u, const Int& a, const Int& b) {
    std::vector<Int> w(u.size() + 1, Int(0));
    for (std::size_t j = 0; j < u.size(); ++j) {
      w[j] += u[j] * a;
      w[j + 1] += u[j] * b;
    }
    return w;
  };
  for (int k = 1; k <= n; ++k) {
    px[k] = mul(px[k - 1], g[0], g[1]);
    py[k] = mul(py[k - 1], g[2], g[3]);
  }
  std::vector<Int> out(n + 1, Int(0));
  for (int i = 0; i <= n; ++i) {
    if (f[i] == 0) continue;
    const std::vector<Int>& u = px[n - i];
    const std::vector<Int>& w = py[i];
    for (std::size_t j = 0; j < u.size(); ++j)
      for (std::size_t k = 0; k < w.size(); ++k) out[j + k] += f[i] * u[j] * w[k];
  }
  return BinaryForm(out);
}

std::array<long double, 3> hermite_covariant(const BinaryForm& f) {
  if (f.degree() != 4) throw Error("quartic form expected");
  if (f[0] == 0) {
    for (long k = 1;; ++k) {
      if (f.eval(1, k) == 0) continue;
      Quad Q = hermite_covariant(substitute(f, {1, 0, k, 1}));
      return quad_substitute(Q, 1, 0, -k, 1);
    }
  }
  return covariant_from_roots(static_cast<long double>(f[0].get_d()), form_roots(f));
}

namespace {

std::array<Int, 4> mat_mul(const std::array<Int, 4>& a, const std::array<Int, 4>& b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

struct Generator {
  char name;
  std::array<Int, 4> g;
};

const std::vector<Generator>& generators() {
  static const std::vector<Generator> gens{
      {'S', {0, 1, -1, 0}}, {'T', {1, 1, 0, 1}}, {'t', {1, -1, 0, 1}}, {'R', {1, 0, 0, -1}}};
  return gens;
}

Quad quad_apply(const Quad& Q, const std::array<Int, 4>& g) {
  return quad_substitute(Q, g[0].get_d(), g[1].get_d(), g[2].get_d(), g[3].get_d());
}

bool nearly_reduced(const Quad& Q) {
  const long double eps = 1e-9L;
  return std::abs(Q[1]) <= Q[0] * (1 + eps) && Q[0] <= Q[2] * (1 + eps);
}

std::vector<Int> form_key(const BinaryForm& f) {
  std::vector<Int> k;
  for (const Int& c : f.coeffs) k.push_back(abs(c));
  for (const Int& c : f.coeffs) k.push_back(c < 0 ? 1 : 0);
  return k;
}

}  // namespace

CanonicalForm gl2z_canonical(const BinaryForm& f, int depth_cap) {
  if (f.degree() != 4) throw Error("quartic form expected");
  CanonicalForm out;
  out.depth_cap = depth_cap;
  std::array<Int, 4> G{1, 0, 0, 1};
  std::string word;
  Quad Q = hermite_covariant(f);
  for (int it = 0; it < 10000; ++it) {
    std::array<Int, 4> step;
    if (std::abs(Q[1]) > Q[0] * (1 + 1e-12L)) {
      const long double k = std::round(Q[1] / (2 * Q[0]));
      if (std::abs(k) > 9e18L) throw Error("reduction step out of range");
      const Int ki(std::to_string(static_cast<long long>(k)));
      step = {1, -ki, 0, 1};
      const std::string letter = ki > 0 ? "t" : "T";
      for (Int i = 0; i < abs(ki); ++i) word += letter;
    } else if (Q[0] > Q[2] * (1 + 1e-12L)) {
      step = {0, 1, -1, 0};
      word += "S";
    } else {
      break;
    }
    G = mat_mul(G, step);
    Q = quad_apply(Q, step);
  }
  BinaryForm f0 = substitute(f, G);
  Q = hermite_covariant(f0);

  struct Node {
    BinaryForm f;
    std::array<Int, 4> G;
    std::string word;
    Quad Q;
    int depth;
  };
  std::set<BinaryForm> seen{f0};
  std::queue<Node> queue;
  queue.push({f0, G, word, Q, 0});
  Node best = queue.front();
  while (!queue.empty()) {
    Node node = queue.front();
    queue.pop();
    ++out.explored;
    if (form_key(node.f) < form_key(best.f)) best = node;
    for (const Generator& gen : generators()) {
      Quad Qn = quad_apply(node.Q, gen.g);
      if (!nearly_reduced(Qn)) continue;
      BinaryForm fn = substitute(node.f, gen.g);
      if (seen.count(fn)) continue;
      if (node.depth == depth_cap) {
        out.decided = false;
        continue;
      }
      seen.insert(fn);
      queue.push({fn, mat_mul(node.G, gen.g), node.word + gen.name, Qn, node.depth + 1});
    }
  }
  out.form = best.f;
  out.gamma = best.G;
  out.trace = best.word;
  return out;
}

EquivalenceResult gl2z_equivalent(const BinaryForm& f, const BinaryForm& g, int depth_cap) {
  EquivalenceResult r;
  const InvariantData a = invariants(f), b = invariants(g);
  if (a.I != b.I || a.J != b.J) return r;
  CanonicalForm cf = gl2z_canonical(f, depth_cap), cg = gl2z_canonical(g, depth_cap);
  r.undecided = !cf.decided || !cg.decided;
  r.equivalent = cf.form == cg.form;
  return r;
}

// --- enumeration -------------------------------------------------------------

namespace {

// Max of det(Q_f) sqrt|Delta| over the real orbits with invariants (I, J). Each orbit contains a form
// s (x^4 + c x^2 y^2 + d x y^3 + e y^4) with s = +-1, and det(Q_f) is constant on orbits.
long double orbit_constant(const Int& I, const Int& J) {
  const Int disc = (4 * I * I * I - J * J) / 27;
  const long double S = std::sqrt(std::abs(static_cast<long double>(disc.get_d())));
  const long double Il = I.get_d(), Jl = J.get_d();
  const long double scale = 1 + std::sqrt(std::abs(Il)) + std::cbrt(std::abs(Jl));
  long double best = 0;
  for (int s : {1, -1}) {
    // d^2 = (6 c I - 8 c^3 - s J) / 27
    std::vector<long double> roots;
    for (const cld& r : poly_roots({s * Jl, -6 * Il, 0, 8}))
      if (std::abs(r.imag()) <= 1e-9L * (1 + std::abs(r))) roots.push_back(r.real());
    std::sort(roots.begin(), roots.end());
    std::vector<long double> cs;
    for (std::size_t i = 0; i < roots.size(); ++i) {
      for (long double off : {1e-6L, 1e-3L, 1e-1L, 0.5L, 1.0L, 3.0L, 10.0L}) {
        cs.push_back(roots[i] - off * scale);
        cs.push_back(roots[i] + off * scale);
      }
      if (i + 1 < roots.size()) {
        for (int k = 1; k < 8; ++k) cs.push_back(roots[i] + (roots[i + 1] - roots[i]) * k / 8);
      }
    }
    const long double lo = (roots.empty() ? 0 : roots.front()) - 4 * scale;
    const long double hi = (roots.empty() ? 0 : roots.back()) + 4 * scale;
    for (int k = 0; k <= 200; ++k) cs.push_back(lo + (hi - lo) * k / 200);
    for (long double c : cs) {
      const long double phi = 6 * c * Il - 8 * c * c * c - s * Jl;
      if (phi < 0) continue;
      const long double e = (Il - c * c) / 12;
      for (int sd : {1, -1}) {
        const long double d = sd * std::sqrt(phi / 27);
        std::vector<cld> r = poly_roots({s * e, s * d, s * c, 0, static_cast<long double>(s)});
        const long double D = quad_det(covariant_from_roots(s, r));
        if (std::isfinite(D)) best = std::max(best, D * S);
      }
    }
  }
  if (best <= 0) throw Error("no real orbit found for the invariants");
  return best;
}

// x >= 0; exact square test.
bool isqrt128(i128 x, i128& r) {
  static const auto sq64 = [] {
    std::array<bool, 64> t{};
    for (int i = 0; i < 64; ++i) t[(i * i) % 64] = true;
    return t;
  }();
  static const auto sq63 = [] {
    std::array<bool, 63> t{};
    for (int i = 0; i < 63; ++i) t[(i * i) % 63] = true;
    return t;
  }();
  static const auto sq65 = [] {
    std::array<bool, 65> t{};
    for (int i = 0; i < 65; ++i) t[(i * i) % 65] = true;
    return t;
  }();
  if (!sq64[static_cast<int>(x & 63)]) return false;
  if (!sq63[static_cast<int>(x % 63)] || !sq65[static_cast<int>(x % 65)]) return false;
  r = static_cast<i128>(std::sqrt(static_cast<long double>(x)));
  while (r > 0 && r * r > x) --r;
  while ((r + 1) * (r + 1) <= x) ++r;
  return r * r == x;
}

i128 to128(const Int& n) {
  if (abs(n) > Int("1000000000000000000")) throw Error("invariant too large for the enumeration kernel");
  return static_cast<i128>(n.get_si());
}

Int from128(i128 v) {
  const bool neg = v < 0;
  unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v) : static_cast<unsigned __int128>(v);
  std::string s;
  do {
    s.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
    u /= 10;
  } while (u);
  if (neg) s.push_back('-');
  std::reverse(s.begin(), s.end());
  return Int(s);
}

}  // namespace

EnumerationReport enumeration_bounds(const Int& I, const Int& J, const EnumerationOptions& opt) {
  if (4 * I * I * I == J * J) throw Error("singular invariants");
  if ((4 * I * I * I - J * J) % 27 != 0) throw Error("invariants of no integral quartic");
  EnumerationReport r;
  r.I = I;
  r.J = J;
  r.orbit_constant = orbit_constant(I, J);
  // With Q_f reduced, |a| <= M, |b| <= (2 + 4 tau) M, |c| <= (3/2 + 6 tau + 10 tau^2) M,
  // where M = det(Q_f) sqrt|Delta| / (16 tau^2) and tau >= sqrt(3)/2.
  const long double tau = std::sqrt(3.0L) / 2;
  const long double X = r.orbit_constant * (1 + 1e-9L) * opt.margin;
  r.bound_a = static_cast<i64>(std::floor(X / (16 * tau * tau)));
  r.bound_b = static_cast<i64>(std::floor(X * (2 + 4 * tau) / (16 * tau * tau)));
  r.bound_c = static_cast<i64>(std::floor(X * (1.5L + 6 * tau + 10 * tau * tau) / (16 * tau * tau)));
  const long double total = 2.0L * r.bound_a * (r.bound_b + 1) * (2.0L * r.bound_c + 1);
  r.candidates = total > 1.8e19L ? UINT64_MAX : static_cast<std::uint64_t>(total);
  return r;
}

EnumerationReport enumerate_classes(const EllipticCurve& curve, const EnumerationOptions& opt) {
  auto [Iq, Jq] = quartic_invariants(curve);
  EnumerationReport r = enumeration_bounds(Iq, Jq, opt);
  if (r.candidates > opt.max_candidates)
    throw Error("enumeration box too large: about " + std::to_string(r.candidates) + " candidates");
  const i128 I = to128(Iq), J = to128(Jq);
  {
    const long double A = r.bound_a, B = r.bound_b, C = r.bound_c;
    const long double K = (72 * A * C + 27 * B * B) * (std::abs(static_cast<long double>(I)) + C * C) + 24 * A * C * C * C +
                          12 * A * std::abs(static_cast<long double>(J));
    const long double D = 81 * B * B * std::pow(4 * A * C + B * B, 2) + 16 * A * A * K;
    if (D > 1e36L) throw Error("enumeration box exceeds the 128-bit kernel");
  }
  std::set<BinaryForm> found;
  for (i64 a = -r.bound_a; a <= r.bound_a; ++a) {
    if (a == 0) continue;
    for (i64 b = 0; b <= r.bound_b; ++b) {
      for (i64 c = -r.bound_c; c <= r.bound_c; ++c) {
        // 12 a e = I + 3 b d - c^2 and 4 a^2 d^2 - b (4 a c - b^2) d = K / 81 (after eliminating e from J)
        const i128 K = (72 * static_cast<i128>(a) * c - 27 * static_cast<i128>(b) * b) * (I - static_cast<i128>(c) * c) -
                       24 * static_cast<i128>(a) * c * c * c - 12 * static_cast<i128>(a) * J;
        const i128 w = static_cast<i128>(b) * (4 * static_cast<i128>(a) * c - static_cast<i128>(b) * b);
        const i128 disc = 81 * w * w + 16 * static_cast<i128>(a) * a * K;
        if (disc < 0) continue;
        i128 s;
        if (!isqrt128(disc, s)) continue;
        const i128 den = 72 * static_cast<i128>(a) * a;
        for (int sign : {1, -1}) {
          if (sign < 0 && s == 0) break;
          const i128 num = 9 * w + sign * s;
          if (num % den != 0) continue;
          const i128 d = num / den;
          const i128 ne = I + 3 * static_cast<i128>(b) * d - static_cast<i128>(c) * c;
          if (ne % (12 * static_cast<i128>(a)) != 0) continue;
          const i128 e = ne / (12 * static_cast<i128>(a));
          BinaryForm f(std::vector<Int>{Int(std::to_string(a)), Int(std::to_string(b)), Int(std::to_string(c)),
                                        from128(d), from128(e)});
          InvariantData inv = invariants(f);
          if (inv.I != Iq || inv.J != Jq) throw Error("enumeration kernel produced wrong invariants");
          found.insert(f);
        }
      }
    }
  }
  r.forms_found = static_cast<int>(found.size());
  std::map<std::vector<Int>, QuarticClass> classes;
  for (const BinaryForm& f : found) {
    CanonicalForm cf = gl2z_canonical(f, opt.depth_cap);
    if (!cf.decided) ++r.undecided;
    std::vector<Int> key = form_key(cf.form);
    if (classes.count(key)) continue;
    QuarticClass q;
    q.representative = cf.form;
    q.I = Iq;
    q.J = Jq;
    q.trace = cf.trace;
    q.gamma = cf.gamma;
    classes.emplace(std::move(key), std::move(q));
  }
  r.z_classes_all = static_cast<int>(classes.size());
  for (auto& [key, q] : classes) {
    if (has_rational_linear_factor(q.representative)) continue;
    if (!locally_soluble(q.representative, &q.certificates)) continue;
    r.classes.push_back(std::move(q));
  }
  return r;
}

// --- rational equivalence ----------------------------------------------------

namespace {

using CMat = std::array<cld, 4>;

CMat cmul(const CMat& a, const CMat& b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

// Moebius map sending z1, z2, z3 to 0, infinity, 1.
CMat to_standard(cld z1, cld z2, cld z3) { return {z3 - z2, -z1 * (z3 - z2), z3 - z1, -z2 * (z3 - z1)}; }

CMat adjugate(const CMat& m) { return {m[3], -m[1], -m[2], m[0]}; }

bool rational_approx(long double x, const Int& max_den, Rat& out) {
  Int h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  long double r = x;
  for (int it = 0; it < 80; ++it) {
    const long double fl = std::floor(r);
    if (std::abs(fl) > 1e18L) break;
    const Int ai(std::to_string(static_cast<long long>(fl)));
    const Int h2 = ai * h1 + h0, k2 = ai * k1 + k0;
    if (k2 > max_den) break;
    h0 = h1;
    h1 = h2;
    k0 = k1;
    k1 = k2;
    const long double approx = static_cast<long double>(h1.get_d()) / static_cast<long double>(k1.get_d());
    if (std::abs(approx - x) <= 1e-10L * std::max<long double>(1, std::abs(x))) {
      out = Rat(h1, k1);
      out.canonicalize();
      return true;
    }
    const long double frac = r - fl;
    if (frac < 1e-30L) break;
    r = 1 / frac;
  }
  return false;
}

}  // namespace

std::optional<std::array<Int, 4>> q_equivalence(const BinaryForm& f, const BinaryForm& g, const Int& den_bound) {
  const InvariantData a = invariants(f), b = invariants(g);
  if (a.I != b.I || a.J != b.J) return std::nullopt;
  if (f[0] == 0 || g[0] == 0) throw Error("q_equivalence expects nonzero leading coefficients");
  const std::vector<cld> alpha = form_roots(f), beta = form_roots(g);
  std::array<int, 4> perm{0, 1, 2, 3};
  const CMat Nb = to_standard(beta[0], beta[1], beta[2]);
  do {
    const CMat M = cmul(adjugate(to_standard(alpha[perm[0]], alpha[perm[1]], alpha[perm[2]])), Nb);
    const cld image = (M[0] * beta[3] + M[1]) / (M[2] * beta[3] + M[3]);
    if (std::abs(image - alpha[perm[3]]) > 1e-7L * (1 + std::abs(alpha[perm[3]]))) continue;
    int big = 0;
    for (int i = 1; i < 4; ++i)
      if (std::abs(M[i]) > std::abs(M[big])) big = i;
    std::array<Rat, 4> q;
    bool ok = true;
    for (int i = 0; i < 4 && ok; ++i) {
      const cld v = M[i] / M[big];
      if (std::abs(v.imag()) > 1e-8L) ok = false;
      else ok = rational_approx(v.real(), den_bound, q[i]);
    }
    if (!ok) continue;
    Int l = 1;
    for (const Rat& x : q) l = lcm(l, Int(x.get_den()));
    std::array<Int, 4> G;
    Int gg = 0;
    for (int i = 0; i < 4; ++i) {
      G[i] = Int(q[i] * l);
      gg = gcd(gg, G[i]);
    }
    for (Int& x : G) x /= gg;
    const Int det = G[0] * G[3] - G[1] * G[2];
    if (det == 0) continue;
    BinaryForm h = substitute(f, G);
    bool match = true;
    for (int i = 0; i <= 4; ++i)
      if (h[i] != det * det * g[i]) match = false;
    if (match) return G;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::nullopt;
}

QCount count_q_classes(const std::vector<QuarticClass>& classes, const std::vector<Int>& ladder) {
  const int n = static_cast<int>(classes.size());
  QCount out;
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  for (const Int& D : ladder) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        if (find(i) == find(j)) continue;
        if (q_equivalence(classes[i].representative, classes[j].representative, D)) parent[find(j)] = find(i);
      }
    int parts = 0;
    for (int i = 0; i < n; ++i)
      if (find(i) == i) ++parts;
    out.parts = parts;
    out.den_bound = D;
    if (is_power_of_two(Int(parts + 1))) {
      out.method = "exact-if-power-check";
      break;
    }
    out.method = "unresolved";
  }
  if (n == 0) out.method = "exact-if-power-check";
  std::map<int, int> ids;
  for (int i = 0; i < n; ++i) {
    const int root = find(i);
    if (!ids.count(root)) ids.emplace(root, static_cast<int>(ids.size()));
    out.part_of.push_back(ids[root]);
  }
  return out;
}

// --- Selmer ------------------------------------------------------------------

bool is_power_of_two(const Int& n) { return n > 0 && mpz_popcount(n.get_mpz_t()) == 1; }

std::vector<Int> two_torsion_roots(const EllipticCurve& e) {
  const Int c1 = -27 * e.I, c0 = -27 * e.J;
  std::set<Int> out;
  for (const cld& r : poly_roots({static_cast<long double>(c0.get_d()), static_cast<long double>(c1.get_d()), 0, 1})) {
    if (std::abs(r.imag()) > 1e-6L * (1 + std::abs(r))) continue;
    const long long m = std::llroundl(r.real());
    for (long long k = m - 1; k <= m + 1; ++k) {
      const Int X(std::to_string(k));
      if (X * X * X + c1 * X + c0 == 0) out.insert(X);
    }
  }
  return {out.begin(), out.end()};
}

std::pair<Int, Int> two_torsion_invariants(const Int& e1, const Int& e2, const Int& e3) {
  const Int s = e1 + e2 + e3;
  const Int I = e1 * e1 + e2 * e2 + e3 * e3 - e1 * e2 - e1 * e3 - e2 * e3;
  const Int J = (3 * e1 - s) * (3 * e2 - s) * (3 * e3 - s);
  return {I, J};
}

SelmerReport selmer(const Int& I0, const Int& J0, const SelmerOptions& opt) {
  SelmerReport r;
  r.curve = normalize_curve(I0, J0);
  r.height = height(r.curve.I, r.curve.J);
  r.enumeration = enumerate_classes(r.curve, opt.enumeration);
  r.z_classes = static_cast<int>(r.enumeration.classes.size());
  QCount qc = count_q_classes(r.enumeration.classes);
  r.q_classes = qc.parts;
  r.q_method = qc.method;
  r.sel2 = qc.parts + 1;
  const std::vector<Int> roots = two_torsion_roots(r.curve);
  r.torsion2 = 1 + static_cast<int>(roots.size());
  if (qc.method == "unresolved") r.flags.push_back("unresolved");
  if (!is_power_of_two(r.sel2)) r.flags.push_back("not-power-of-two");
  if (r.sel2 < r.torsion2) r.flags.push_back("below-torsion");
  if (r.enumeration.undecided > 0) r.flags.push_back("canonical-cap");
  if (opt.run_oracle && roots.size() == 3) {
    r.oracle = two_torsion_oracle(roots[0], roots[1], roots[2]).size;
    if (*r.oracle != r.sel2) r.flags.push_back("oracle-mismatch");
  }
  return r;
}

namespace {

Int squarefree_product(const Int& a, const Int& b) {
  const Int g = gcd(a, b);
  return (a / g) * (b / g);
}

// Some point of P^1(R) where every form is >= 0. Between consecutive real roots the signs are constant.
bool real_simultaneous_nonneg(const std::vector<BinaryForm>& forms) {
  std::vector<long double> pts;
  for (const BinaryForm& f : forms) {
    if (f[0] == 0) continue;
    for (const cld& r : form_roots(f))
      if (std::abs(r.imag()) <= 1e-9L * (1 + std::abs(r))) pts.push_back(r.real());
  }
  std::sort(pts.begin(), pts.end());
  std::vector<Rat> tests;
  if (pts.empty()) {
    tests.push_back(0);
  } else {
    tests.push_back(Rat(static_cast<double>(pts.front())) - 1);
    tests.push_back(Rat(static_cast<double>(pts.back())) + 1);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
      tests.push_back((Rat(static_cast<double>(pts[i])) + Rat(static_cast<double>(pts[i + 1]))) / 2);
  }
  auto all_nonneg = [&](const Int& x, const Int& y) {
    return std::all_of(forms.begin(), forms.end(), [&](const BinaryForm& f) { return f.eval(x, y) >= 0; });
  };
  if (all_nonneg(1, 0)) return true;
  for (const Rat& t : tests)
    if (all_nonneg(t.get_num(), t.get_den())) return true;
  return false;
}

}  // namespace

OracleReport two_torsion_oracle(const Int& e1, const Int& e2, const Int& e3) {
  if (e1 == e2 || e1 == e3 || e2 == e3) throw Error("oracle needs distinct roots");
  OracleReport r;
  r.primes = prime_divisors(2 * (e1 - e2) * (e1 - e3) * (e2 - e3));
  std::vector<Int> basis{-1};
  basis.insert(basis.end(), r.primes.begin(), r.primes.end());
  const int m = static_cast<int>(basis.size());
  std::vector<Int> classes;
  for (int mask = 0; mask < (1 << m); ++mask) {
    Int d = 1;
    for (int i = 0; i < m; ++i)
      if (mask >> i & 1) d *= basis[i];
    classes.push_back(d);
  }
  for (const Int& d1 : classes)
    for (const Int& d2 : classes) {
      // d1 z1^2 = d2 x^2 + (e2 - e1) y^2 and d1 d2 z3^2 = d2 x^2 + (e2 - e3) y^2
      const BinaryForm qa(std::vector<Int>{d1 * d2, 0, d1 * (e2 - e1)});
      const BinaryForm qb(std::vector<Int>{d1 * d2 * d2, 0, d1 * d2 * (e2 - e3)});
      const std::vector<BinaryForm> forms{qa, qb};
      if (!real_simultaneous_nonneg(forms)) continue;
      const Int disc = form_discriminant(form_product(qa, qb));
      bool ok = true;
      for (const Int& p : r.primes)
        if (!qp_simultaneous_squares(forms, p, 2 * valuation(disc, p) + 4)) {
          ok = false;
          break;
        }
      if (ok) r.elements.emplace_back(d1, d2);
    }
  r.size = static_cast<long>(r.elements.size());
  std::set<std::pair<Int, Int>> set(r.elements.begin(), r.elements.end());
  r.subgroup = set.count({Int(1), Int(1)}) > 0;
  for (const auto& x : r.elements)
    for (const auto& y : r.elements)
      if (!set.count({squarefree_product(x.first, y.first), squarefree_product(x.second, y.second)})) r.subgroup = false;
  if (!is_power_of_two(r.size)) throw Error("oracle produced a set whose size is not a power of two");
  return r;
}

// --- moments -----------------------------------------------------------------

bool MomentsFilter::accepts(const Int& I, const Int& J) const {
  auto ok = [](const Int& v, const Int& m, const Int& res) {
    if (m <= 1) return true;
    Int a = v % m, b = res % m;
    if (a < 0) a += m;
    if (b < 0) b += m;
    return a == b;
  };
  return ok(I, mod_I, res_I) && ok(J, mod_J, res_J);
}

double MomentsReport::first_moment() const { return count == 0 ? 0.0 : Rat(sum_sel, count).get_d(); }
double MomentsReport::second_moment() const { return count == 0 ? 0.0 : Rat(sum_sel_sq, count).get_d(); }

bool MomentsReport::monotone() const {
  for (std::size_t i = 1; i < cumulative_sel.size(); ++i)
    if (cumulative_sel[i] < cumulative_sel[i - 1] || cumulative_sel_sq[i] < cumulative_sel_sq[i - 1]) return false;
  return true;
}

std::vector<EllipticCurve> normalized_curves(const Rat& bound, const MomentsFilter& filter) {
  std::vector<EllipticCurve> out;
  if (bound <= 0) return out;
  // H < bound needs 4|I|^3 < 27 bound and J^2 < 27 bound.
  const Rat lim = 27 * bound;
  const Int jmax = isqrt(Int(lim.get_num() / lim.get_den())) + 1;
  Int imax = 0;
  while (4 * (imax + 1) * (imax + 1) * (imax + 1) < lim) ++imax;
  for (Int I = -(imax / 3) * 3; I <= imax; I += 3)
    for (Int J = -(jmax / 27) * 27; J <= jmax; J += 27) {
      if (4 * I * I * I == J * J) continue;
      if (height(I, J) >= bound) continue;
      if (!filter.accepts(I, J)) continue;
      EllipticCurve e = normalize_curve(I, J);
      if (e.I != I || e.J != J) continue;
      out.push_back(e);
    }
  std::sort(out.begin(), out.end(), [](const EllipticCurve& a, const EllipticCurve& b) {
    const Rat ha = height(a.I, a.J), hb = height(b.I, b.J);
    if (ha != hb) return ha < hb;
    if (a.I != b.I) return a.I < b.I;
    return a.J < b.J;
  });
  return out;
}

namespace {

void accumulate(MomentsReport& r) {
  std::sort(r.rows.begin(), r.rows.end(), [](const CurveRow& a, const CurveRow& b) {
    if (a.height != b.height) return a.height < b.height;
    if (a.I != b.I) return a.I < b.I;
    return a.J < b.J;
  });
  r.count = 0;
  r.sum_sel = 0;
  r.sum_sel_sq = 0;
  r.cumulative_sel.clear();
  r.cumulative_sel_sq.clear();
  for (const CurveRow& row : r.rows) {
    r.count += 1;
    r.sum_sel += row.sel2;
    r.sum_sel_sq += row.sel2 * row.sel2;
    r.cumulative_sel.push_back(r.sum_sel);
    r.cumulative_sel_sq.push_back(r.sum_sel_sq);
  }
}

}  // namespace

MomentsReport moments_over(const std::vector<EllipticCurve>& curves, const SelmerOptions& opt, int shard_index,
                           int shard_count) {
  if (shard_count < 1 || shard_index < 0 || shard_index >= shard_count) throw Error("bad shard");
  MomentsReport r;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    if (static_cast<int>(i % shard_count) != shard_index) continue;
    const EllipticCurve& e = curves[i];
    try {
      SelmerReport s = selmer(e.I, e.J, opt);
      if (s.q_method == "unresolved") {
        r.excluded.push_back(e.I.get_str() + "," + e.J.get_str() + ": unresolved");
        continue;
      }
      CurveRow row;
      row.I = s.curve.I;
      row.J = s.curve.J;
      row.height = s.height;
      row.z_classes = s.z_classes;
      row.q_classes = s.q_classes;
      row.sel2 = s.sel2;
      row.torsion2 = s.torsion2;
      row.oracle = s.oracle;
      for (std::size_t k = 0; k < s.flags.size(); ++k) row.flags += (k ? ";" : "") + s.flags[k];
      r.rows.push_back(row);
    } catch (const Error& ex) {
      r.excluded.push_back(e.I.get_str() + "," + e.J.get_str() + ": " + ex.what());
    }
  }
  accumulate(r);
  return r;
}

MomentsReport moments_harness(const Rat& bound, const MomentsFilter& filter, const SelmerOptions& opt, int shard_index,
                              int shard_count) {
  MomentsReport r = moments_over(normalized_curves(bound, filter), opt, shard_index, shard_count);
  r.height_bound = bound;
  return r;
}

MomentsReport merge_moments(const std::vector<MomentsReport>& parts) {
  MomentsReport r;
  for (const MomentsReport& p : parts) {
    r.height_bound = p.height_bound;
    r.rows.insert(r.rows.end(), p.rows.begin(), p.rows.end());
    r.excluded.insert(r.excluded.end(), p.excluded.begin(), p.excluded.end());
  }
  std::sort(r.excluded.begin(), r.excluded.end());
  accumulate(r);
  return r;
}

}  // namespace twosel
