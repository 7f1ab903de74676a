#include "apfive/valprof.hpp"

#include <sstream>

#include "apfive/error.hpp"

namespace apfive {

namespace {

long v(const Int& n, Prime q) { return long(valuation(n, Int(q))); }

std::set<Prime> prime_set(const Int& n) {
  std::set<Prime> s;
  for (const auto& kv : FactoredInteger::of(n).factors()) {
    APFIVE_ASSERT(kv.first.fits_slong_p(), "prime fits in a machine word");
    s.insert(kv.first.get_si());
  }
  return s;
}

// valuation of the leading constant ell3 (2d+1) / 3 of the factorization
long v_outer(const DProfile& P, Prime q) { return v(Int(P.ell3), q) + v(P.Q2, q) - v(Int(3), q); }

std::vector<ExponentChoice> prime_options(const DProfile& P, Prime q, Prime kappa) {
  std::vector<ExponentChoice> out;
  if (kappa == 1) {
    // q does not divide x; whatever q carries in the constant must be completed by p(x^2, r^2)
    long c = v_outer(P, q);
    out.push_back({Alt::S, Affine(0), c > 0 ? Affine(1, -c) : Affine(0)});
    return out;
  }
  long v3 = v(Int(3), q);
  if (P.T.count(q)) {
    long e = v(P.D, q) - v3;
    out.push_back({Alt::S, Affine(1, -e), Affine(e)});
    if (e % 4 == 0 && e / 4 >= 1) out.push_back({Alt::L, Affine(e / 4), Affine(1, -e / 4)});
  } else if (P.R.count(q)) {
    // overlap prime (q | 2d+1 as well) carries the extra -v_q(2d+1)
    long vs = v(P.S, q), vq = v(P.Q2, q), v5 = v(Int(5), q);
    out.push_back({Alt::S, Affine(1, -vs - vq), Affine(vs)});
    long e = vs - v5;
    if (e % 2 == 0 && e / 2 >= 1) out.push_back({Alt::L, Affine(e / 2), Affine(1, -vq - e / 2)});
  } else if (P.Q.count(q)) {
    out.push_back({Alt::S, Affine(1, -v(P.Q2, q) + v3), Affine(0)});
  } else {
    fail(ErrorKind::Argument, "prime " + std::to_string(q) + " is not in T, R or Q");
  }
  return out;
}

bool vacuous(const std::vector<ExponentChoice>& opts) {
  for (const auto& o : opts)
    if (o.x.beta != 0 || o.pform.beta != 0) return false;
  return true;
}

}  // namespace

DProfile profile(long d) {
  if (d < 1) fail(ErrorKind::Argument, "d must be >= 1");
  DProfile P;
  P.d = d;
  P.D = Int(d) * (d + 1);
  P.S = 3 * P.D - 1;
  P.Q2 = 2 * d + 1;
  P.K = 25 * P.D - 3 * P.S;
  P.ell3 = mpz_divisible_ui_p(P.D.get_mpz_t(), 3) ? 3 : 1;
  P.ell5 = Int(gcd(Int(25), P.S)).get_si();
  P.T = prime_set(P.D);
  P.R = prime_set(P.S);
  P.Q = prime_set(P.Q2);
  for (Prime q : P.T) APFIVE_ASSERT(!P.R.count(q) && !P.Q.count(q), "T is disjoint from R and Q");
  for (Prime q : P.R) APFIVE_ASSERT(!P.Q.count(q) || q == 7, "R and Q meet only at 7");
  auto all = FactoredInteger::of(P.D * P.Q2 * P.S);
  for (const auto& kv : all.factors()) P.M = std::max<long>(P.M, kv.second);
  // 2^6 5^2 d^2 (d+1)^2 rad_5((2d+1)(3d^2+3d-1)(16d^2+16d+3))
  Int N = 64 * 25 * P.D * P.D * rad_excluding(P.Q2 * P.S * P.K, Int(5));
  P.N = FactoredInteger::of(N);
  return P;
}

Prime KappaBranch::at(Prime q) const {
  auto it = kappa.find(q);
  return it == kappa.end() ? 1 : it->second;
}

std::string KappaBranch::id() const {
  std::ostringstream os;
  bool first = true;
  for (const auto& [q, k] : kappa) {
    if (!first) os << ",";
    first = false;
    os << "k" << q << "=" << k;
  }
  return os.str();
}

KappaBranch parse_branch(const std::string& spec, const std::vector<Prime>& active) {
  KappaBranch b;
  for (Prime q : active) b.kappa[q] = 1;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (item.size() < 4 || item[0] != 'k' || eq == std::string::npos)
      fail(ErrorKind::Argument, "bad branch item '" + item + "' (expected kQ=V)");
    Prime q, k;
    try {
      q = std::stol(item.substr(1, eq - 1));
      k = std::stol(item.substr(eq + 1));
    } catch (const std::exception&) {
      fail(ErrorKind::Argument, "bad branch item '" + item + "'");
    }
    if (!b.kappa.count(q)) fail(ErrorKind::Argument, "branch references inactive prime " + std::to_string(q));
    if (k != 1 && k != q) fail(ErrorKind::Argument, "kappa_" + std::to_string(q) + " must be 1 or " + std::to_string(q));
    b.kappa[q] = k;
  }
  return b;
}

std::vector<Prime> active_primes(const DProfile& P) {
  std::set<Prime> all(P.T);
  all.insert(P.R.begin(), P.R.end());
  all.insert(P.Q.begin(), P.Q.end());
  std::vector<Prime> out;
  for (Prime q : all)
    if (!vacuous(prime_options(P, q, q)) || !vacuous(prime_options(P, q, 1))) out.push_back(q);
  return out;
}

std::vector<KappaBranch> kappa_branches(long d) {
  auto act = active_primes(profile(d));
  std::vector<KappaBranch> out;
  for (unsigned long mask = 0; mask < (1UL << act.size()); ++mask) {
    KappaBranch b;
    for (size_t i = 0; i < act.size(); ++i) b.kappa[act[i]] = (mask >> i) & 1 ? act[i] : 1;
    out.push_back(b);
  }
  return out;
}

Decomposition decompose(long d, const KappaBranch& branch) { return decompose(profile(d), branch); }

Decomposition decompose(const DProfile& P, const KappaBranch& branch) {
  auto act = active_primes(P);
  std::set<Prime> aset(act.begin(), act.end());
  for (const auto& [q, k] : branch.kappa) {
    if (!aset.count(q)) fail(ErrorKind::Argument, "branch references inactive prime " + std::to_string(q));
    if (k != 1 && k != q) fail(ErrorKind::Argument, "kappa_" + std::to_string(q) + " must be 1 or " + std::to_string(q));
  }
  Decomposition out;
  out.d = P.d;
  out.branch = branch;
  for (Prime q : act) out.options[q] = prime_options(P, q, branch.at(q));
  return out;
}

const ExponentChoice& Decomposition::chosen(Prime q, const AltSelection& sel) const {
  auto it = options.find(q);
  if (it == options.end()) fail(ErrorKind::Argument, "prime " + std::to_string(q) + " not in decomposition");
  auto s = sel.find(q);
  Alt want = s == sel.end() ? Alt::S : s->second;
  for (const auto& o : it->second)
    if (o.alt == want) return o;
  fail(ErrorKind::Argument, "no " + std::string(want == Alt::L ? "bounded" : "affine") +
                                " alternative for prime " + std::to_string(q) + " on branch " + branch.id());
}

std::map<Prime, Affine> Decomposition::x_exponents(const AltSelection& sel) const {
  std::map<Prime, Affine> m;
  for (const auto& kv : options) m[kv.first] = chosen(kv.first, sel).x;
  return m;
}

std::map<Prime, Affine> Decomposition::pform_exponents(const AltSelection& sel) const {
  std::map<Prime, Affine> m;
  for (const auto& kv : options) m[kv.first] = chosen(kv.first, sel).pform;
  return m;
}

Decomposition::Sets Decomposition::branch_sets(const AltSelection& sel) const {
  auto P = profile(d);
  Sets s;
  for (const auto& kv : options) {
    Prime q = kv.first;
    if (branch.at(q) == 1) continue;
    Alt a = chosen(q, sel).alt;
    if (P.T.count(q)) (a == Alt::S ? s.S_eps : s.L_eps).insert(q);
    else if (P.R.count(q)) (a == Alt::S ? s.S_delta : s.L_delta).insert(q);
  }
  return s;
}

}  // namespace apfive
