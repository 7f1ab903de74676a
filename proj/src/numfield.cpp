#include "apfive/numfield.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "apfive/error.hpp"

namespace apfive {

namespace {

using Cplx = std::complex<long double>;

// ---- polynomials over F_p, low to high, as longs

using PolyP = std::vector<long>;

void trim(PolyP& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

long inv_mod(long a, long p) {
  long t = 0, nt = 1, r = p, nr = ((a % p) + p) % p;
  while (nr) {
    long q = r / nr;
    std::tie(t, nt) = std::make_pair(nt, t - q * nt);
    std::tie(r, nr) = std::make_pair(nr, r - q * nr);
  }
  return ((t % p) + p) % p;
}

PolyP pmod(PolyP a, const PolyP& b, long p) {
  trim(a);
  long inv = inv_mod(b.back(), p);
  while (a.size() >= b.size()) {
    long c = a.back() * inv % p;
    size_t shift = a.size() - b.size();
    for (size_t i = 0; i < b.size(); ++i) a[shift + i] = ((a[shift + i] - c * b[i]) % p + p) % p;
    trim(a);
  }
  return a;
}

PolyP pquot(PolyP a, const PolyP& b, long p) {
  trim(a);
  if (a.size() < b.size()) return {};
  PolyP q(a.size() - b.size() + 1, 0);
  long inv = inv_mod(b.back(), p);
  while (a.size() >= b.size()) {
    long c = a.back() * inv % p;
    size_t shift = a.size() - b.size();
    q[shift] = c;
    for (size_t i = 0; i < b.size(); ++i) a[shift + i] = ((a[shift + i] - c * b[i]) % p + p) % p;
    trim(a);
  }
  return q;
}

PolyP pgcd(PolyP a, PolyP b, long p) {
  trim(a);
  trim(b);
  while (!b.empty()) {
    PolyP r = pmod(a, b, p);
    a = std::move(b);
    b = std::move(r);
  }
  return a;
}

PolyP pmulmod(const PolyP& a, const PolyP& b, const PolyP& f, long p) {
  if (a.empty() || b.empty()) return {};
  PolyP c(a.size() + b.size() - 1, 0);
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) c[i + j] = (c[i + j] + a[i] * b[j]) % p;
  return pmod(c, f, p);
}

PolyP ppowmod(PolyP base, long e, const PolyP& f, long p) {
  PolyP r{1};
  base = pmod(base, f, p);
  while (e) {
    if (e & 1) r = pmulmod(r, base, f, p);
    base = pmulmod(base, base, f, p);
    e >>= 1;
  }
  return r;
}

// degrees of the irreducible factors of a squarefree f mod p
std::vector<int> ddf_degrees(PolyP f, long p) {
  std::vector<int> degs;
  PolyP h{0, 1};
  for (int i = 1; 2 * i <= int(f.size()) - 1; ++i) {
    h = ppowmod(h, p, f, p);
    PolyP hx = h;
    hx.resize(std::max<size_t>(hx.size(), 2), 0);
    hx[1] = (hx[1] - 1 + p) % p;
    trim(hx);
    PolyP g = pgcd(f, hx, p);
    int dg = int(g.size()) - 1;
    if (dg > 0) {
      for (int k = 0; k < dg / i; ++k) degs.push_back(i);
      f = pquot(f, g, p);
      h = pmod(h, f, p);
    }
  }
  if (f.size() > 1) degs.push_back(int(f.size()) - 1);
  return degs;
}

std::set<int> subset_sums(const std::vector<int>& degs) {
  std::set<int> s{0};
  for (int d : degs) {
    std::set<int> t = s;
    for (int x : s) t.insert(x + d);
    s = std::move(t);
  }
  return s;
}

std::vector<Rat> reduce_mod(std::vector<Rat> a, const std::vector<Int>& f) {
  // f monic
  int n = int(f.size()) - 1;
  for (int i = int(a.size()) - 1; i >= n; --i) {
    if (a[i] == 0) continue;
    Rat c = a[i];
    for (int j = 0; j <= n; ++j) a[i - n + j] -= c * f[j];
  }
  a.resize(n);
  return a;
}

long double to_ld(const Rat& q) {
  // mpq -> long double via 64-bit-safe string free path
  return static_cast<long double>(q.get_d());
}

}  // namespace

// ---------------------------------------------------------------- roots

std::vector<Cplx> complex_roots(const std::vector<Int>& poly) {
  int n = int(poly.size()) - 1;
  if (n < 1) return {};
  const Int& lead = poly.back();
  if (n == 1) return {Cplx(-to_ld(Rat(poly[0], lead)), 0)};
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) comp(i, n - 1) = -Rat(poly[i], lead).get_d();
  Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
  std::vector<Cplx> roots;
  for (int i = 0; i < n; ++i) roots.emplace_back(es.eigenvalues()[i].real(), es.eigenvalues()[i].imag());
  std::vector<long double> c(n + 1);
  for (int i = 0; i <= n; ++i) c[i] = to_ld(Rat(poly[i], lead));
  for (auto& z : roots) {
    for (int it = 0; it < 8; ++it) {
      Cplx v = 0, dv = 0;
      for (int i = n; i >= 0; --i) {
        dv = dv * z + v;
        v = v * z + c[i];
      }
      if (std::abs(dv) == 0) break;
      Cplx step = v / dv;
      z -= step;
      if (std::abs(step) <= 1e-18L * std::max<long double>(1, std::abs(z))) break;
    }
  }
  return roots;
}

bool is_irreducible(const std::vector<Int>& poly) {
  int n = int(poly.size()) - 1;
  if (n < 1) return false;
  if (n == 1) return true;
  std::set<int> possible;
  for (int k = 0; k <= n; ++k) possible.insert(k);
  int used = 0;
  for (long p : primes_upto(2000)) {
    if (mpz_divisible_ui_p(poly.back().get_mpz_t(), p)) continue;
    PolyP f(n + 1);
    for (int i = 0; i <= n; ++i) f[i] = mpz_fdiv_ui(poly[i].get_mpz_t(), p);
    PolyP df;
    for (int i = 1; i <= n; ++i) df.push_back(f[i] * i % p);
    trim(df);
    if (df.empty() || pgcd(f, df, p).size() > 1) continue;  // not squarefree mod p
    std::set<int> s = subset_sums(ddf_degrees(f, p));
    std::set<int> keep;
    std::set_intersection(possible.begin(), possible.end(), s.begin(), s.end(), std::inserter(keep, keep.end()));
    possible = std::move(keep);
    if (possible.size() == 2) return true;
    if (++used >= 60) break;
  }
  if (used == 0) {
    // squarefree nowhere in range: repeated factor over Q
    return false;
  }
  // Inconclusive (e.g. Galois group without n-cycles): look for a factor among
  // products of numeric roots, confirming candidates by exact division.
  auto roots = complex_roots(poly);
  RationalPolynomial f;
  {
    std::vector<Rat> c;
    for (const auto& a : poly) c.emplace_back(a);
    f = RationalPolynomial(c);
  }
  for (int k : possible) {
    if (k == 0 || 2 * k > n) continue;
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
    while (true) {
      std::vector<Cplx> g{Cplx(1)};
      for (int i : idx) {
        std::vector<Cplx> h(g.size() + 1, Cplx(0));
        for (size_t j = 0; j < g.size(); ++j) {
          h[j + 1] += g[j];
          h[j] -= g[j] * roots[i];
        }
        g = std::move(h);
      }
      bool integral = true;
      std::vector<Rat> gc;
      for (const auto& z : g) {
        long double r = std::round(z.real());
        if (std::abs(z.imag()) > 1e-6L || std::abs(z.real() - r) > 1e-6L * std::max<long double>(1, std::abs(r))) {
          integral = false;
          break;
        }
        gc.emplace_back(Int(std::to_string(static_cast<long long>(r))));
      }
      if (integral) {
        // exact check: remainder of f modulo the candidate factor
        RationalPolynomial gp(gc), rem = f;
        while (!rem.is_zero() && rem.degree() >= gp.degree()) {
          Rat c = rem.coeff(rem.degree()) / gp.coeff(gp.degree());
          std::vector<Rat> sh(rem.degree() - gp.degree() + 1);
          sh.back() = c;
          rem = rem - gp * RationalPolynomial(sh);
        }
        if (rem.is_zero()) return false;
      }
      int i = k - 1;
      while (i >= 0 && idx[i] == n - k + i) --i;
      if (i < 0) break;
      ++idx[i];
      for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  return true;
}

// ---------------------------------------------------------------- field

NumberField::NumberField(std::vector<Int> poly) : poly_(std::move(poly)) { roots_ = complex_roots(poly_); }

std::shared_ptr<const NumberField> NumberField::make_unchecked(std::vector<Int> poly) {
  if (poly.size() < 2) fail(ErrorKind::Argument, "defining polynomial must have degree >= 1");
  if (poly.back() != 1) fail(ErrorKind::Argument, "defining polynomial must be monic");
  return std::shared_ptr<const NumberField>(new NumberField(std::move(poly)));
}

std::shared_ptr<const NumberField> NumberField::make(std::vector<Int> poly) {
  auto f = make_unchecked(std::move(poly));
  if (!is_irreducible(f->poly())) fail(ErrorKind::Argument, "defining polynomial " + f->str() + " is reducible");
  return f;
}

const std::vector<Cplx>& NumberField::roots() const { return roots_; }

std::string NumberField::str() const {
  std::vector<Rat> c;
  for (const auto& a : poly_) c.emplace_back(a);
  return RationalPolynomial(c).str();
}

// ---------------------------------------------------------------- elements

NumberFieldElement::NumberFieldElement(FieldPtr field, std::vector<Rat> coords)
    : field_(std::move(field)), coords_(std::move(coords)) {
  if (!field_) fail(ErrorKind::Argument, "element without a field");
  if (int(coords_.size()) != field_->degree())
    fail(ErrorKind::Argument, "coordinate vector has length " + std::to_string(coords_.size()) +
                                  ", field degree is " + std::to_string(field_->degree()));
  for (auto& c : coords_) c.canonicalize();
}

NumberFieldElement NumberFieldElement::constant(FieldPtr field, const Rat& c) {
  std::vector<Rat> v(field->degree(), Rat(0));
  v[0] = c;
  return {std::move(field), std::move(v)};
}

static void same_field(const NumberFieldElement& a, const NumberFieldElement& b) {
  if (a.field() != b.field() && a.field()->poly() != b.field()->poly())
    fail(ErrorKind::Argument, "elements of different fields");
}

NumberFieldElement NumberFieldElement::operator+(const NumberFieldElement& o) const {
  same_field(*this, o);
  std::vector<Rat> c(coords_);
  for (size_t i = 0; i < c.size(); ++i) c[i] += o.coords_[i];
  return {field_, std::move(c)};
}

NumberFieldElement NumberFieldElement::operator-(const NumberFieldElement& o) const {
  same_field(*this, o);
  std::vector<Rat> c(coords_);
  for (size_t i = 0; i < c.size(); ++i) c[i] -= o.coords_[i];
  return {field_, std::move(c)};
}

NumberFieldElement NumberFieldElement::operator*(const NumberFieldElement& o) const {
  same_field(*this, o);
  size_t n = coords_.size();
  std::vector<Rat> c(2 * n - 1);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) c[i + j] += coords_[i] * o.coords_[j];
  return {field_, reduce_mod(std::move(c), field_->poly())};
}

bool NumberFieldElement::operator==(const NumberFieldElement& o) const {
  return field_->poly() == o.field_->poly() && coords_ == o.coords_;
}

bool NumberFieldElement::is_rational() const {
  return std::all_of(coords_.begin() + 1, coords_.end(), [](const Rat& c) { return c == 0; });
}

std::vector<Cplx> NumberFieldElement::embeddings() const {
  std::vector<Cplx> out;
  for (const auto& z : field_->roots()) {
    Cplx v = 0;
    for (auto it = coords_.rbegin(); it != coords_.rend(); ++it) v = v * z + to_ld(*it);
    out.push_back(v);
  }
  return out;
}

RationalPolynomial NumberFieldElement::charpoly() const {
  int n = field_->degree();
  // column j = this * t^j
  std::vector<std::vector<Rat>> M(n, std::vector<Rat>(n));
  std::vector<Rat> col(coords_);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) M[i][j] = col[i];
    std::vector<Rat> sh(n + 1);
    for (int i = 0; i < n; ++i) sh[i + 1] = col[i];
    col = reduce_mod(std::move(sh), field_->poly());
  }
  // reduce to upper Hessenberg form by similarity
  for (int m = 1; m < n - 1; ++m) {
    int piv = -1;
    for (int i = m; i < n; ++i)
      if (M[i][m - 1] != 0) {
        piv = i;
        break;
      }
    if (piv < 0) continue;
    if (piv != m) {
      std::swap(M[piv], M[m]);
      for (int i = 0; i < n; ++i) std::swap(M[i][piv], M[i][m]);
    }
    for (int i = m + 1; i < n; ++i) {
      if (M[i][m - 1] == 0) continue;
      Rat u = M[i][m - 1] / M[m][m - 1];
      for (int j = 0; j < n; ++j) M[i][j] -= u * M[m][j];
      for (int j = 0; j < n; ++j) M[j][m] += u * M[j][i];
    }
  }
  // characteristic polynomial of a Hessenberg matrix by the standard recurrence
  std::vector<RationalPolynomial> p(n + 1);
  p[0] = RationalPolynomial({Rat(1)});
  for (int m = 1; m <= n; ++m) {
    p[m] = RationalPolynomial({-M[m - 1][m - 1], Rat(1)}) * p[m - 1];
    Rat prod = 1;
    for (int i = 1; i < m; ++i) {
      prod *= M[m - i][m - i - 1];
      p[m] = p[m] - p[m - i - 1] * (prod * M[m - i - 1][m - 1]);
    }
  }
  return p[n];
}

Rat resultant(const RationalPolynomial& f0, const RationalPolynomial& g0) {
  RationalPolynomial f = f0, g = g0;
  if (f.is_zero() || g.is_zero()) return 0;
  Rat acc = 1;
  while (true) {
    int df = f.degree(), dg = g.degree();
    if (dg == 0) {
      Rat r = acc;
      for (int i = 0; i < df; ++i) r *= g.coeff(0);
      return r;
    }
    if (df < dg) {
      if ((df * dg) % 2) acc = -acc;
      std::swap(f, g);
      continue;
    }
    // f = q g + r ; res(f, g) = (-1)^{df dg} lc(g)^{df - dr} res(g, r)
    RationalPolynomial r = f;
    while (!r.is_zero() && r.degree() >= dg) {
      std::vector<Rat> sh(r.degree() - dg + 1);
      sh.back() = r.coeff(r.degree()) / g.coeff(dg);
      r = r - g * RationalPolynomial(sh);
    }
    if (r.is_zero()) return 0;
    int dr = r.degree();
    if ((df * dg) % 2) acc = -acc;
    for (int i = 0; i < df - dr; ++i) acc *= g.coeff(dg);
    f = g;
    g = r;
  }
}

Rat nf_norm(const NumberFieldElement& e) {
  const auto& F = *e.field();
  std::vector<Rat> fc;
  for (const auto& a : F.poly()) fc.emplace_back(a);
  RationalPolynomial f(fc), g(e.coords());
  if (g.is_zero()) return 0;
  // Res(f, g) / lc(f)^deg g, with f monic
  return resultant(f, g);
}

NumberFieldElement nf_sub_int(const NumberFieldElement& e, const Int& t) {
  std::vector<Rat> c = e.coords();
  c[0] -= t;
  return {e.field(), std::move(c)};
}

}  // namespace apfive
