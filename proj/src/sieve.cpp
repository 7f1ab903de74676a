#include "apfive/sieve.hpp"

#include <mpfr.h>

#include <algorithm>
#include <future>
#include <optional>
#include <sstream>

#include "apfive/appower.hpp"
#include "apfive/error.hpp"

namespace apfive {

namespace {

Int squarefree_part(const Int& n) {
  if (n == 0) return 0;
  Int r = sgn(n) < 0 ? -1 : 1;
  for (const auto& [q, e] : FactoredInteger::of(n).factors())
    if (e % 2) r *= q;
  return r;
}

Affine lookup(const DiscriminantProfile& m, Prime q) {
  auto it = m.find(q);
  return it == m.end() ? Affine(0) : it->second;
}

// Norm(a - t) = (-1)^n charpoly_a(t)
Int norm_minus(const RationalPolynomial& cp, int n, long t) {
  Rat v = cp(Rat(t));
  if (n % 2) v = -v;
  APFIVE_ASSERT(v.get_den() == 1, "norm of an algebraic integer is integral");
  return v.get_num();
}

// ---- polynomials over F_p, coefficients low -> high

using ModPoly = std::vector<Int>;

void trim(ModPoly& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

Int modp(const Int& x, const Int& p) {
  Int r = x % p;
  if (r < 0) r += p;
  return r;
}

ModPoly poly_rem(ModPoly a, const ModPoly& b, const Int& p) {
  Int inv;
  mpz_invert(inv.get_mpz_t(), b.back().get_mpz_t(), p.get_mpz_t());
  while (a.size() >= b.size()) {
    Int c = modp(a.back() * inv, p);
    size_t off = a.size() - b.size();
    for (size_t k = 0; k < b.size(); ++k) a[off + k] = modp(a[off + k] - c * b[k], p);
    trim(a);
  }
  return a;
}

ModPoly poly_mulmod(const ModPoly& a, const ModPoly& b, const ModPoly& m, const Int& p) {
  if (a.empty() || b.empty()) return {};
  ModPoly c(a.size() + b.size() - 1, 0);
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
  for (auto& x : c) x = modp(x, p);
  trim(c);
  return poly_rem(std::move(c), m, p);
}

ModPoly poly_gcd(ModPoly a, ModPoly b, const Int& p) {
  while (!b.empty()) {
    ModPoly r = poly_rem(a, b, p);
    a = std::move(b);
    b = std::move(r);
  }
  return a;
}

// image of a in F_p[X]/(f); none when a coordinate has p in its denominator
std::optional<ModPoly> reduce_mod(const NumberFieldElement& a, const Int& p) {
  ModPoly r;
  for (const auto& c : a.coords()) {
    if (mpz_divisible_p(c.get_den_mpz_t(), p.get_mpz_t())) return std::nullopt;
    Int inv;
    mpz_invert(inv.get_mpz_t(), c.get_den_mpz_t(), p.get_mpz_t());
    r.push_back(modp(c.get_num() * inv, p));
  }
  trim(r);
  return r;
}

struct Constraint {
  const NumberFieldElement* a;
  long scale;               // l for an auxiliary prime, q for a multiplicative one
  std::vector<long> targets;
};

// Some prime of K_f above p satisfies every congruence simultaneously iff the ideal they
// generate in F_p[X]/(f) is proper.
bool survives_at(const FieldPtr& K, const std::vector<Constraint>& cs, const Int& p) {
  ModPoly h;
  for (const auto& c : K->poly()) h.push_back(modp(c, p));
  trim(h);
  for (const auto& c : cs) {
    auto a = reduce_mod(*c.a, p);
    if (!a) continue;
    ModPoly prod{modp(Int(c.scale), p)};
    trim(prod);
    for (long t : c.targets) {
      if (prod.empty()) break;
      ModPoly d = *a;
      if (d.empty()) d.push_back(0);
      d[0] = modp(d[0] - t, p);
      trim(d);
      prod = poly_mulmod(prod, d, h, p);
    }
    if (prod.empty()) continue;
    h = poly_gcd(h, prod, p);
    if (h.size() <= 1) return false;
  }
  return true;
}

}  // namespace

std::vector<long> auxiliary_primes(const DProfile& prof, long aux_bound, const std::set<Prime>& r_support) {
  if (aux_bound < 3) fail(ErrorKind::Argument, "auxiliary bound must be >= 3");
  std::vector<long> out;
  Int twoN = 2 * prof.N.value();
  for (long ell : primes_upto(aux_bound)) {
    if (mpz_divisible_ui_p(twoN.get_mpz_t(), ell)) continue;
    if (r_support.count(ell)) continue;
    out.push_back(ell);
  }
  return out;
}

std::vector<long> trace_candidates(long ell) {
  std::vector<long> t;
  for (long a = 0; a * a <= 4 * ell; a += 2) {
    t.push_back(a);
    if (a) t.push_back(-a);
  }
  t.push_back(ell + 1);
  t.push_back(-(ell + 1));
  std::sort(t.begin(), t.end());
  return t;
}

FormOutcome mazur_eliminate(const Newform& f, const FreyCurveModel& E, const LoweredLevel& L, const DProfile& prof,
                            const SieveOptions& opt, const std::set<Prime>& r_support) {
  if (Int(f.level) != L.N_f)
    fail(ErrorKind::Argument, "newform " + f.label + " has level " + std::to_string(f.level) + ", expected " +
                                  L.N_f.get_str());
  (void)E;
  FormOutcome out;
  out.label = f.label;
  Int G = 0;
  int n = f.dim;
  std::vector<Constraint> cs;
  for (long ell : auxiliary_primes(prof, opt.aux_bound, r_support)) {
    if (mpz_divisible_ui_p(L.N_f.get_mpz_t(), ell)) continue;
    auto cp = f.a(ell).charpoly();
    auto ts = trace_candidates(ell);
    Int B = 1;
    for (long t : ts) {
      B *= norm_minus(cp, n, t);
      if (B == 0) break;
    }
    if (B == 0) continue;
    G = gcd(G, ell * B);
    out.aux_primes.push_back(ell);
    cs.push_back({&f.a(ell), ell, ts});
  }
  // primes removed by level lowering are multiplicative for the Frey curve
  for (Prime q : L.stripped) {
    if (mpz_divisible_ui_p(L.N_f.get_mpz_t(), q)) continue;
    auto cp = f.a(q).charpoly();
    Int v = Int(q) * norm_minus(cp, n, q + 1) * norm_minus(cp, n, -(q + 1));
    if (v == 0) continue;
    G = gcd(G, v);
    cs.push_back({&f.a(q), q, {q + 1, -(q + 1)}});
  }
  out.G = abs(G);
  if (G == 0) {
    out.outcome = Outcome::Survives;
    out.reason = "a_l(f) matches a Frey trace candidate at every auxiliary prime";
    return out;
  }
  for (const auto& kv : FactoredInteger::of(out.G).factors())
    if (n == 1 || survives_at(f.field, cs, kv.first)) out.surviving_primes.push_back(kv.first);
  Int mx = out.surviving_primes.empty() ? Int(0) : out.surviving_primes.back();
  if (mx > opt.threshold) {
    out.outcome = Outcome::Survives;
    out.reason = "obstruction prime " + mx.get_str() + " exceeds the threshold";
    out.max_surviving = mx.fits_slong_p() ? mx.get_si() : 0;
    return out;
  }
  out.outcome = Outcome::Eliminated;
  out.max_surviving = mx.get_si();
  return out;
}

// ---------------------------------------------------------------- bounds

IrrationalityBound irrationality_bound(const Int& N) {
  if (N < 1) fail(ErrorKind::Argument, "N must be >= 1");
  IrrationalityBound b;
  b.N = N;
  b.mu = mu_index(N);
  b.exponent = Rat(N + 1, 6);
  b.exponent.canonicalize();
  b.base_square = Rat(b.mu, 6);
  b.base_square.canonicalize();
  mpfr_t s, t;
  mpfr_inits2(256, s, t, (mpfr_ptr)0);
  mpfr_set_q(s, b.base_square.get_mpq_t(), MPFR_RNDN);
  mpfr_sqrt(s, s, MPFR_RNDN);
  mpfr_add_ui(s, s, 1, MPFR_RNDN);
  mpfr_log10(t, s, MPFR_RNDN);
  mpfr_mul_q(t, t, b.exponent.get_mpq_t(), MPFR_RNDN);
  char buf[128];
  mpfr_snprintf(buf, sizeof buf, "%.39Re", t);
  b.log10 = buf;
  b.log10_value = mpfr_get_ld(t, MPFR_RNDN);
  mpfr_clears(s, t, (mpfr_ptr)0);
  return b;
}

ThreeAdicCheck three_adic_preconditions(long d) {
  if (d < 1 || (d % 9 != 1 && d % 9 != 7))
    fail(ErrorKind::Precondition, "d = " + std::to_string(d) + " is not 1 or 7 mod 9");
  ThreeAdicCheck t;
  t.v3 = long(valuation(Int(2 * d + 1), Int(3)));
  t.ell3 = d % 3 == 1 ? 1 : 3;
  if (t.v3 != 1) fail(ErrorKind::Precondition, "v_3(2d+1) != 1");
  if (t.ell3 != 1) fail(ErrorKind::Precondition, "gcd(3, d(d+1)) != 1");
  return t;
}

TheoremDCertificate theoremD_pipeline(long d) {
  auto pre = three_adic_preconditions(d);
  auto P = profile(d);
  TheoremDCertificate c;
  c.d = d;
  c.v3 = pre.v3;
  c.ell3 = P.ell3;
  c.min_exponent = P.min_exponent();
  APFIVE_ASSERT(c.ell3 == pre.ell3, "profile agrees on gcd(3, d(d+1))");

  c.three_stripped = true;
  for (const auto& br : kappa_branches(d)) {
    auto eq = build_ternary(d, br);
    auto L = lowered_level(attach_frey(eq));
    if (mpz_divisible_ui_p(L.N_f.get_mpz_t(), 3) || mpz_divisible_ui_p(eq.C.get_mpz_t(), 3) ||
        eq.A.exps.count(3) || eq.B.exps.count(3))
      c.three_stripped = false;
  }
  // 3 | x p(x^2, r^2) or the 3-adic valuation of the sum is 1 or 2, for every residue pair mod 27
  auto qf = quintic_factorization(d);
  c.three_divides_xy = true;
  for (long x = 0; x < 27; ++x)
    for (long r = 0; r < 27; ++r) {
      if (x % 3 == 0 && r % 3 == 0) continue;
      Int pf = qf.form(x, r);
      if (x % 3 == 0 || mpz_divisible_ui_p(pf.get_mpz_t(), 3)) continue;
      Rat full = qf.evaluate(x, r);
      Int n = full.get_num() % 27;
      long v = n == 0 ? 3 : long(valuation(n, Int(3)));
      if (v != 1 && v != 2) c.three_divides_xy = false;
    }
  // rational forms: a_3(f) = +-4 mod p with |a_3(f)| <= 2 sqrt 3
  Int worst = 1;
  for (long a = -3; a <= 3; ++a)
    for (long s : {4L, -4L})
      for (const auto& kv : FactoredInteger::of(Int(s - a)).factors()) worst = std::max(worst, kv.first);
  c.rational_bound = worst.get_si();
  c.irrational = irrationality_bound(P.N.value());
  c.notes.push_back("3 is multiplicative for the Frey curve and absent from every lowered level, so a_3(f) = +-4 mod p");
  c.notes.push_back("rational newforms are eliminated for p > " + std::to_string(c.rational_bound));
  c.notes.push_back(
      "irrational newforms are eliminated for p above (sqrt(mu(N)/6) + 1)^((N+1)/6); the genus estimate "
      "g0+(N) <= (N+1)/2 by itself leads to the larger exponent N+1, so the stated exponent is used as given");
  return c;
}

// ---------------------------------------------------------------- symplectic

std::string to_string(SympType t) {
  switch (t) {
    case SympType::Symplectic: return "SYMPLECTIC";
    case SympType::Antisymplectic: return "ANTISYMPLECTIC";
    case SympType::Conditional: return "CONDITIONAL";
    case SympType::Inapplicable: return "INAPPLICABLE";
  }
  return "?";
}

SympResult symplectic_test(const DiscriminantProfile& vE, const DiscriminantProfile& vF, Prime ell, long p) {
  SympResult r;
  Affine e = lookup(vE, ell), f = lookup(vF, ell);
  if (e.is_zero() || f.is_zero()) return r;  // not multiplicative on both sides
  if (p != 0) {
    if (p == 2 || p == ell || !is_prime(Int(p))) return r;
    long ev = e.at(p), fv = f.at(p);
    if (ev % p == 0 || fv % p == 0) return r;
    // only residues mod p matter: e(p) = beta mod p
    r.residue = squarefree_part(Int(e.beta) * f.at(p));
    int k = kronecker_symbol(r.residue, Int(p));
    r.type = k == 1 ? SympType::Symplectic : SympType::Antisymplectic;
    return r;
  }
  if (e.beta == 0 || !f.is_const()) return r;
  r.residue = squarefree_part(Int(e.beta) * f.beta);
  if (r.residue == 1) {
    r.type = SympType::Symplectic;
    r.condition = "always";
  } else {
    r.type = SympType::Conditional;
    r.condition = "symplectic iff kronecker(" + r.residue.get_str() + ", p) = 1";
  }
  return r;
}

SympCombine symplectic_combine(const DiscriminantProfile& vE, const CurveClassData& candidate,
                               const std::vector<Prime>& ells, long p) {
  SympCombine out;
  auto vF = profile_of(candidate);
  bool sym = false, anti = false;
  for (Prime ell : ells) {
    // the criterion needs multiplicative reduction of the candidate at ell
    if (valuation(candidate.conductor, Int(ell)) != 1) continue;
    auto r = symplectic_test(vE, vF, ell, p);
    out.per_ell[ell] = r;
    sym |= r.type == SympType::Symplectic;
    anti |= r.type == SympType::Antisymplectic;
  }
  out.eliminated = sym && anti;
  return out;
}

DiscriminantProfile odd_profile(const FreyCurveModel& E) {
  DiscriminantProfile m;
  for (const auto& [k, v] : E.delta_profile) {
    if (k.empty() || !std::isdigit(static_cast<unsigned char>(k[0]))) continue;
    Prime q = std::stol(k);
    if (q != 2) m[q] = v;
  }
  return m;
}

DiscriminantProfile profile_of(const CurveClassData& c) {
  DiscriminantProfile m;
  for (const auto& [q, e] : c.minimal_discriminant.factors()) m[q.get_si()] = Affine(long(e));
  return m;
}

// ---------------------------------------------------------------- cases

std::string CaseSpec::id() const {
  std::ostringstream os;
  os << "d=" << d << " " << branch.id();
  if (construction == Construction::Secondary) {
    os << " secondary";
    if (r_two) os << (*r_two == RTwo::Zero ? " v2(r)=0" : *r_two == RTwo::One ? " v2(r)=1" : " v2(r)>=2");
  }
  return os.str();
}

std::string to_string(CaseStatus s) {
  switch (s) {
    case CaseStatus::Eliminated: return "ELIMINATED";
    case CaseStatus::Survivors: return "UNRESOLVED";
    case CaseStatus::Unresolved: return "UNRESOLVED";
    case CaseStatus::UnresolvedByDesign: return "UNRESOLVED-BY-DESIGN";
  }
  return "?";
}

bool unresolved_by_design(const CaseSpec& c) {
  return c.d == 2 && c.construction == Construction::Primary && c.branch.at(2) == 1;
}

EliminationReport eliminate_case(NewformStore& store, const CaseSpec& c, const SieveOptions& opt) {
  EliminationReport rep;
  rep.spec = c;
  auto prof = profile(c.d);
  auto eq = c.construction == Construction::Primary ? build_ternary(c.d, c.branch)
                                                      : build_second_ternary(c.d, c.branch);
  auto E = attach_frey(eq, c.r_two);
  rep.level = lowered_level(E, c.r_support);
  rep.N_f = rep.level.N_f;
  rep.equation = eq.str();
  rep.frey = E.weierstrass;
  if (unresolved_by_design(c)) {
    rep.status = CaseStatus::UnresolvedByDesign;
    rep.note = "newform space at level " + rep.N_f.get_str() + " is not computed";
    return rep;
  }
  if (!rep.N_f.fits_slong_p()) fail(ErrorKind::Argument, "level too large");
  auto forms = store.fetch_newforms(rep.N_f.get_si());
  std::vector<std::future<FormOutcome>> fs;
  for (const auto& f : forms)
    fs.push_back(std::async(std::launch::async, [&, fp = &f] { return mazur_eliminate(*fp, E, rep.level, prof, opt, c.r_support); }));
  long bound = 0;
  for (auto& fu : fs) {
    rep.per_form.push_back(fu.get());
    const auto& o = rep.per_form.back();
    if (o.outcome == Outcome::Survives) rep.survivors.push_back(o.label);
    else bound = std::max(bound, o.max_surviving);
  }
  rep.overall_bound = bound;
  rep.status = rep.survivors.empty() ? CaseStatus::Eliminated : CaseStatus::Survivors;
  if (forms.empty()) rep.note = "no newforms at this level";
  return rep;
}

}  // namespace apfive

namespace apfive {

std::vector<RTwo> secondary_two_cases(const std::set<Prime>& r_support) {
  if (!r_support.count(2)) return {RTwo::Zero};
  return {RTwo::Zero, RTwo::One, RTwo::AtLeastTwo};
}

namespace {

SymplecticSummary symplectic_for(NewformStore& store, const FreyCurveModel& E, const LoweredLevel& L,
                                 const std::string& form, long low, long p_max) {
  SymplecticSummary s;
  s.form = form;
  auto vE = odd_profile(E);
  auto cls = form.substr(0, form.find(".2.a.")) + "." + form.substr(form.rfind('.') + 1);
  std::vector<CurveClassData> curves;
  try {
    curves = store.curves_in_class(cls);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::IO && e.kind() != ErrorKind::NotFound) throw;
  }
  if (curves.empty()) {
    for (long p : primes_upto(p_max))
      if (p > low) s.surviving_p.push_back(p);
    s.condition = "no curve data for " + cls;
    return s;
  }
  s.has_curve = true;
  // any curve of the class works, the isogenous ones have the same mod p representation
  const CurveClassData& F = curves.front();
  s.curve = F.label;
  for (const auto& [q, e] : E.conductor)
    if (q != 2 && e == 1 && !lookup(vE, q).is_zero() && valuation(F.conductor, Int(q)) == 1) s.ells.push_back(q);
  auto vF = profile_of(F);
  std::vector<std::string> conds;
  for (Prime ell : s.ells) {
    auto r = symplectic_test(vE, vF, ell, 0);
    s.symbolic[ell] = r;
    if (r.type == SympType::Conditional) conds.push_back(r.condition);
  }
  for (long p : primes_upto(p_max)) {
    if (p <= low) continue;
    if (!symplectic_combine(vE, F, s.ells, p).eliminated) s.surviving_p.push_back(p);
  }
  (void)L;
  std::ostringstream os;
  os << "compared with " << F.label << " at l in {";
  for (size_t k = 0; k < s.ells.size(); ++k) os << (k ? "," : "") << s.ells[k];
  os << "}";
  for (const auto& c : conds) os << "; " << c;
  s.condition = os.str();
  return s;
}

}  // namespace

BranchReport eliminate_branch(NewformStore& store, long d, const KappaBranch& branch, const BranchOptions& opt) {
  BranchReport rep;
  rep.d = d;
  rep.branch = branch;
  CaseSpec c{d, branch, Construction::Primary, std::nullopt, opt.r_support};
  rep.primary = eliminate_case(store, c, opt.sieve);
  if (rep.primary.status == CaseStatus::UnresolvedByDesign) {
    rep.status = CaseStatus::UnresolvedByDesign;
    rep.conclusion = "2 | x";
    return rep;
  }
  long low = std::max<long>(rep.primary.overall_bound.value_or(0), 2 * profile(d).M);
  if (rep.primary.status == CaseStatus::Eliminated) {
    rep.status = CaseStatus::Eliminated;
    rep.bound = rep.primary.overall_bound;
    rep.conclusion = "no solutions for p > " + std::to_string(*rep.bound);
    return rep;
  }
  if (opt.symplectic) {
    auto E = attach_frey(build_ternary(d, branch));
    for (const auto& f : rep.primary.survivors)
      rep.symplectic.push_back(symplectic_for(store, E, rep.primary.level, f, low, opt.p_max));
  }
  if (opt.secondary) {
    long bound = rep.primary.overall_bound.value_or(0);
    bool all = true;
    for (RTwo t : secondary_two_cases(opt.r_support)) {
      CaseSpec sc{d, branch, Construction::Secondary, t, opt.r_support};
      rep.secondary.push_back(eliminate_case(store, sc, opt.sieve));
      const auto& s = rep.secondary.back();
      if (s.status != CaseStatus::Eliminated) all = false;
      else bound = std::max(bound, s.overall_bound.value_or(0));
    }
    if (all) {
      rep.status = CaseStatus::Eliminated;
      rep.bound = bound;
      rep.conclusion = "no solutions for p > " + std::to_string(bound) + " when rad(r) divides the declared support";
      return rep;
    }
  }
  rep.status = CaseStatus::Survivors;
  rep.conclusion = std::to_string(rep.primary.survivors.size()) + " newform(s) survive the sieve";
  return rep;
}

}  // namespace apfive
