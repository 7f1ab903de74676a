#include "apfive/ternary.hpp"

#include <set>
#include <sstream>

#include "apfive/error.hpp"

namespace apfive {

namespace {

long v(const Int& n, Prime q) { return long(valuation(n, Int(q))); }

long floor_div(long a, long b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

Int qpow(Prime q, long e) {
  Int r;
  mpz_ui_pow_ui(r.get_mpz_t(), q, e);
  return r;
}

Affine get(const std::map<Prime, Affine>& m, Prime q) {
  auto it = m.find(q);
  return it == m.end() ? Affine(0) : it->second;
}

// Valuation bookkeeping for T1 + T2 = T3 with
//   T1 = k1 * prod q^{4 x_q} * (p-th power), T2 = k2 * prod q^{y_q} * (p-th power), T3 = k3 * c0^2.
// Divides out the common power of every prime and moves square factors of k3 into c.
struct Terms {
  Int k1, k2, k3;
  std::map<Prime, Affine> e1, e2;  // kappa parts already multiplied by their weights
  Int c_u, c_w;                    // c0 = c_u x^2 + c_w r^2
};

void bookkeep(const Terms& t, TernaryEquation& eq) {
  std::set<Prime> support;
  for (const Int* k : {&t.k1, &t.k2, &t.k3})
    for (const auto& kv : FactoredInteger::of(*k).factors()) support.insert(kv.first.get_si());
  for (const auto& kv : t.e1) support.insert(kv.first);
  for (const auto& kv : t.e2) support.insert(kv.first);

  eq.A.sign = sgn(t.k1) < 0 ? -1 : 1;
  eq.B.sign = sgn(t.k2) < 0 ? -1 : 1;
  if (sgn(t.k3) < 0) fail(ErrorKind::Argument, "square side has negative coefficient");
  eq.C = 1;
  Rat cmul = 1;
  for (Prime q : support) {
    Affine v1 = v(t.k1, q) + get(t.e1, q);
    Affine v2 = v(t.k2, q) + get(t.e2, q);
    long vk3 = v(t.k3, q);
    Affine m;
    long e;
    if (v1 != v2) {
      m = std::min(v1, v2);
      if (!m.is_const())
        fail(ErrorKind::Argument, "prime " + std::to_string(q) + " divides both sides to an unbounded power");
      e = vk3 - m.beta;
      if (e > 0 || e % 2 != 0)
        fail(ErrorKind::Argument, "inconsistent branch " + eq.branch.id() + ": valuation at " + std::to_string(q) +
                                      " of the square side cannot equal " + m.str());
    } else {
      if (!v1.is_const())
        fail(ErrorKind::Argument, "prime " + std::to_string(q) + " has equal unbounded valuation on both sides");
      m = v1;
      e = vk3 - m.beta;
    }
    long cq = ((e % 2) + 2) % 2;
    long shift = floor_div(e, 2);
    if (!(v1 - m).is_zero()) eq.A.exps[q] = v1 - m;
    if (!(v2 - m).is_zero()) eq.B.exps[q] = v2 - m;
    if (cq) eq.C *= q;
    if (shift > 0) cmul *= qpow(q, shift);
    if (shift < 0) cmul /= qpow(q, -shift);
    if (!m.is_zero()) eq.common[q] = m;
  }
  Int u = t.c_u * cmul.get_num(), w = t.c_w * cmul.get_num(), den = cmul.get_den();
  Int g = gcd(gcd(u, w), den);
  eq.c = {u / g, w / g, den / g};
}

std::map<Prime, Affine> scaled(const std::map<Prime, Affine>& m, long k) {
  std::map<Prime, Affine> out;
  for (const auto& [q, a] : m)
    if (!a.is_zero()) out[q] = k * a;
  return out;
}

TernaryEquation base(long d, const KappaBranch& branch, const AltSelection& sel, const Decomposition& dec) {
  TernaryEquation eq;
  eq.d = d;
  eq.branch = branch;
  eq.selection = sel;
  eq.x_exps = dec.x_exponents(sel);
  eq.pform_exps = dec.pform_exponents(sel);
  for (const auto& kv : dec.options)
    if (dec.chosen(kv.first, sel).alt == Alt::L) eq.bounded_alternative = true;
  return eq;
}

}  // namespace

QuadraticIdentity quadratic_identity(const Int& a1, const Int& a2, const Int& a3) {
  QuadraticIdentity id{a1, a2, a3, a2 * a2 - 4 * a1 * a3, a2, 2 * a3, 2 * a1, a2};
  // coefficientwise expansion in x^2, xy, y^2
  APFIVE_ASSERT(id.disc + 4 * a3 * a1 == id.lin_x * id.lin_x, "x^2 coefficient");
  APFIVE_ASSERT(4 * a3 * a2 == 2 * id.lin_x * id.lin_y, "xy coefficient");
  APFIVE_ASSERT(4 * a3 * a3 == id.lin_y * id.lin_y, "y^2 coefficient");
  APFIVE_ASSERT(4 * a1 * a1 == id.sym_x * id.sym_x, "symmetric x^2 coefficient");
  APFIVE_ASSERT(4 * a1 * a2 == 2 * id.sym_x * id.sym_y, "symmetric xy coefficient");
  APFIVE_ASSERT(id.disc + 4 * a1 * a3 == id.sym_y * id.sym_y, "symmetric y^2 coefficient");
  return id;
}

Int Coefficient::at(long p) const {
  Int r = sign;
  for (const auto& [q, e] : exps) {
    long k = e.at(p);
    if (k < 0) fail(ErrorKind::Argument, "negative exponent " + e.str() + " at p = " + std::to_string(p));
    r *= qpow(q, k);
  }
  return r;
}

Affine Coefficient::exponent(Prime q) const { return get(exps, q); }

std::string Coefficient::str() const {
  std::ostringstream os;
  if (sign < 0) os << "-";
  bool first = true;
  for (const auto& [q, e] : exps) {
    if (!first) os << "*";
    first = false;
    os << q;
    if (!(e.is_const() && e.beta == 1)) {
      if (e.is_const()) os << "^" << e.beta;
      else os << "^(" << e.str() << ")";
    }
  }
  if (r_power) {
    if (!first) os << "*";
    os << "r^" << r_power;
    first = false;
  }
  if (first) os << "1";
  return os.str();
}

std::string CExpr::str() const {
  std::ostringstream os;
  auto term = [&](const Int& k, const char* var, bool lead) {
    if (k == 0) return;
    if (!lead) os << (sgn(k) < 0 ? "-" : "+");
    else if (sgn(k) < 0) os << "-";
    if (abs(k) != 1) os << Int(abs(k)).get_str() << "*";
    os << var;
  };
  bool paren = den != 1;
  if (paren) os << "(";
  term(u, "x^2", true);
  term(w, "r^2", u == 0);
  if (paren) os << ")/" << den.get_str();
  return os.str();
}

std::string TernaryEquation::str() const {
  std::ostringstream os;
  os << A.str() << (signature == Signature::S4pp2 ? "*a^(4p)" : "*1^p") << " + " << B.str() << "*b^p = " << C.get_str()
     << "*(" << c.str() << ")^2";
  return os.str();
}

TernaryEquation build_ternary(long d, const KappaBranch& branch, const AltSelection& sel) {
  auto P = profile(d);
  auto dec = decompose(P, branch);
  TernaryEquation eq = base(d, branch, sel, dec);
  eq.signature = Signature::S4pp2;
  // K x^4 + ell3 S p(x^2, r^2) = D (5 x^2 + S r^2)^2, K = 25 D - 3 S
  Terms t{P.K, Int(P.ell3) * P.S, P.D, scaled(eq.x_exps, 4), scaled(eq.pform_exps, 1), Int(5), P.S};
  bookkeep(t, eq);
  return eq;
}

TernaryEquation build_second_ternary(long d, const KappaBranch& branch, const AltSelection& sel) {
  auto P = profile(d);
  auto dec = decompose(P, branch);
  TernaryEquation eq = base(d, branch, sel, dec);
  eq.signature = Signature::Spp2;
  eq.secondary = true;
  Int a1 = 3 / P.ell3, a2 = 10 * P.D / P.ell3, a3 = P.D * P.S / P.ell3;
  auto id = quadratic_identity(a1, a2, a3);
  // disc r^4 + 4 a1 p(x^2, r^2) = (2 a1 x^2 + a2 r^2)^2; r is taken coprime to the support primes
  Terms t{id.disc, 4 * a1, Int(1), {}, scaled(eq.pform_exps, 1), id.sym_x, id.sym_y};
  if (t.k1 == 0) fail(ErrorKind::Argument, "degenerate identity: discriminant vanishes");
  bookkeep(t, eq);
  eq.A.r_power = 4;
  return eq;
}

}  // namespace apfive
