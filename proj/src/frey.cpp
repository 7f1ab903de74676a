#include "apfive/frey.hpp"

#include <sstream>
#include <vector>

#include "apfive/error.hpp"

namespace apfive {

namespace {

struct TermInfo {
  Affine v2;              // 2-adic valuation of the term
  bool at_least = false;  // only a lower bound is known
};

TermInfo two_adic_A(const TernaryEquation& eq, std::optional<RTwo> r_two) {
  TermInfo t{eq.A.exponent(2)};
  if (eq.A.r_power) {
    if (!r_two) fail(ErrorKind::Argument, "secondary construction needs the 2-adic valuation of r");
    if (*r_two == RTwo::One) t.v2 = t.v2 + Affine(eq.A.r_power);
    if (*r_two == RTwo::AtLeastTwo) {
      t.v2 = t.v2 + Affine(2 * eq.A.r_power);
      t.at_least = true;
    }
  }
  return t;
}

bool even(const TermInfo& t) { return !t.v2.is_zero(); }

std::string affine_key(Prime q) { return std::to_string(q); }

}  // namespace

Affine FreyCurveModel::delta(Prime q) const {
  auto it = delta_profile.find(affine_key(q));
  return it == delta_profile.end() ? Affine(0) : it->second;
}

FreyCurveModel attach_frey(const TernaryEquation& eq, std::optional<RTwo> r_two) {
  FreyCurveModel E;
  E.eq = eq;
  if (eq.secondary && !r_two) r_two = RTwo::Zero;
  E.r_two = eq.secondary ? r_two : std::nullopt;

  TermInfo tA = two_adic_A(eq, r_two);
  TermInfo tB{eq.B.exponent(2)};
  long vC = long(valuation(eq.C, Int(2)));
  std::ostringstream diag;
  diag << "v2(A-term)=" << (tA.at_least ? ">=" : "") << tA.v2.str() << ", v2(B-term)=" << tB.v2.str()
       << ", v2(C)=" << vC;

  if (even(tA) && even(tB)) fail(ErrorKind::Unsupported, "unsupported 2-adic case: both terms even (" + diag.str() + ")");
  const TermInfo* ev = even(tA) ? &tA : even(tB) ? &tB : nullptr;
  Affine v2disc;
  if (!ev) {
    E.slot = Slot::B;
    E.family = FreyFamily::Odd;
    if (vC == 0) {
      E.two_exponent = 5;
      E.two_case = "both terms odd, C odd";
    } else if (vC == 1) {
      E.two_exponent = 8;
      E.two_case = "both terms odd, 2 || C";
    } else {
      fail(ErrorKind::Unsupported, "unsupported 2-adic case: " + diag.str());
    }
    v2disc = Affine(6 + 3 * vC);
  } else {
    if (vC != 0) fail(ErrorKind::Unsupported, "unsupported 2-adic case: even term with even C (" + diag.str() + ")");
    E.slot = ev == &tA ? Slot::A : Slot::B;
    Affine e = ev->v2;
    if (e.is_const() && !ev->at_least && e.beta == 2) {
      E.family = FreyFamily::Odd;
      E.two_exponent = 3;
      E.two_case = "even term with v2 = 2";
      v2disc = Affine(6 + 2 * 2);
    } else if (e.is_const() && !ev->at_least && e.beta == 6) {
      E.family = FreyFamily::Even;
      E.two_exponent = 0;
      E.two_case = "even term with v2 = 6";
      v2disc = Affine(0);
    } else if (!e.is_const() || e.beta >= 7) {
      E.family = FreyFamily::Even;
      E.two_exponent = 1;
      E.two_case = e.is_const() ? "even term with v2 >= 7" : "even term with v2 growing with p";
      v2disc = 2 * e - Affine(12);
    } else {
      fail(ErrorKind::Unsupported, "unsupported 2-adic case: " + diag.str());
    }
  }

  const Coefficient& S = E.slot == Slot::A ? eq.A : eq.B;
  const Coefficient& N = E.slot == Slot::A ? eq.B : eq.A;
  // odd part: nonslot * slot^2 * C^3
  std::map<Prime, Affine> odd;
  for (const auto& [q, e] : N.exps)
    if (q != 2) odd[q] = odd[q] + e;
  for (const auto& [q, e] : S.exps)
    if (q != 2) odd[q] = odd[q] + 2 * e;
  for (const auto& kv : FactoredInteger::of(eq.C).factors()) {
    Prime q = kv.first.get_si();
    if (q != 2) odd[q] = odd[q] + Affine(3 * long(kv.second));
  }
  E.delta_profile["2"] = v2disc;
  for (const auto& [q, e] : odd)
    if (!e.is_zero()) E.delta_profile[affine_key(q)] = e;
  long wa = E.slot == Slot::A ? 2 : 1, wb = E.slot == Slot::B ? 2 : 1;
  if (eq.signature == Signature::S4pp2) E.delta_profile["a"] = Affine(4 * wa, 0);
  if (eq.A.r_power) E.delta_profile["r"] = Affine(eq.A.r_power * wa);
  E.delta_profile["b"] = Affine(wb, 0);

  // conductor on the N_d-supported part
  E.conductor[2] = E.two_exponent;
  for (const auto& [q, e] : odd) {
    if (e.is_zero()) continue;
    E.conductor[q] = mpz_divisible_ui_p(eq.C.get_mpz_t(), q) ? 2 : 1;
  }

  std::ostringstream w;
  std::string termS = S.str() + (E.slot == Slot::A ? (eq.signature == Signature::S4pp2 ? "*a^(4p)" : "") : "*b^p");
  std::string c = eq.c.str();
  if (E.family == FreyFamily::Odd)
    w << "Y^2 = X^3 + 2*" << eq.C.get_str() << "*c*X^2 + " << eq.C.get_str() << "*" << termS << "*X";
  else
    w << "Y^2 + XY = X^3 + ((" << eq.C.get_str() << "*c - 1)/4)*X^2 + (" << eq.C.get_str() << "*" << termS
      << "/64)*X";
  w << ", c = " << c;
  E.weierstrass = w.str();
  return E;
}

LoweredLevel lowered_level(const FreyCurveModel& E, const std::set<Prime>& r_support) {
  LoweredLevel L;
  L.delta = E.two_exponent;
  L.two_exponent_rule = E.two_case;
  const auto& eq = E.eq;
  // The level for d = 2 with 2 | x is fixed at 3*5*11*17 by the worked case, while the
  // generic recipe for an even term of valuation 4p-5 gives a multiplicative prime 2.
  if (!eq.secondary && eq.d == 2 && eq.branch.at(2) == 2) {
    L.delta = 0;
    L.pinned = true;
    L.two_exponent_rule = "fixed table: d = 2, kappa_2 = 2";
    if (E.two_exponent == 1) L.stripped.insert(2);
  }
  Int N = 1;
  mpz_ui_pow_ui(N.get_mpz_t(), 2, L.delta);
  for (const auto& [key, e] : E.delta_profile) {
    if (key == "2" || key == "a" || key == "b" || key == "r") continue;
    Prime q = std::stol(key);
    if (mpz_divisible_ui_p(eq.C.get_mpz_t(), q)) {
      N *= q * q;
      L.additive.insert(q);
    } else if (e.beta != 0) {
      N *= q;
    } else {
      L.stripped.insert(q);
    }
  }
  // odd primes of r divide the r^4 factor of the secondary A-term; they cannot divide x
  if (eq.secondary) {
    for (Prime q : r_support) {
      if (q == 2 || eq.branch.at(q) == q) continue;
      if (E.delta_profile.count(affine_key(q)) || L.additive.count(q)) continue;
      N *= q;
    }
  }
  L.N_f = N;
  return L;
}

LoweredLevel lowered_level(long d, const KappaBranch& branch, Construction c, std::optional<RTwo> r_two,
                           const std::set<Prime>& r_support) {
  auto eq = c == Construction::Primary ? build_ternary(d, branch) : build_second_ternary(d, branch);
  return lowered_level(attach_frey(eq, r_two), r_support);
}

Int weierstrass_discriminant(const std::array<Int, 5>& a) {
  Int b2 = a[0] * a[0] + 4 * a[1];
  Int b4 = 2 * a[3] + a[0] * a[2];
  Int b6 = a[2] * a[2] + 4 * a[4];
  Int b8 = a[0] * a[0] * a[4] + 4 * a[1] * a[4] - a[0] * a[2] * a[3] + a[1] * a[2] * a[2] - a[3] * a[3];
  return -b2 * b2 * b8 - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6;
}

long count_points(const std::array<Int, 5>& a, long ell) {
  if (ell < 3 || !is_prime(Int(ell))) fail(ErrorKind::Argument, "count_points needs an odd prime");
  Int disc = weierstrass_discriminant(a);
  if (mpz_divisible_ui_p(disc.get_mpz_t(), ell))
    fail(ErrorKind::Argument, "bad reduction at " + std::to_string(ell));
  // (2Y + a1 X + a3)^2 = 4X^3 + b2 X^2 + 2 b4 X + b6
  auto md = [ell](const Int& z) { return long(mpz_fdiv_ui(z.get_mpz_t(), ell)); };
  long b2 = md(a[0] * a[0] + 4 * a[1]);
  long b4 = md(2 * a[3] + a[0] * a[2]);
  long b6 = md(a[2] * a[2] + 4 * a[4]);
  std::vector<signed char> chi(ell, -1);
  chi[0] = 0;
  for (long y = 1; y < ell; ++y) chi[(y * y) % ell] = 1;
  long s = 0;
  using W = __int128;
  for (long x = 0; x < ell; ++x) {
    W v = ((W(4) * x % ell * x % ell * x) + W(b2) * x % ell * x + W(2) * b4 * x + b6) % ell;
    s += chi[long(v)];
  }
  return -s;
}

}  // namespace apfive
