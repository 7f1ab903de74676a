#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "apfive/affine.hpp"
#include "apfive/ntcore.hpp"

namespace apfive {

using Prime = long;

struct DProfile {
  long d = 0;
  long M = 0;     // max_q v_q(d(d+1)(2d+1)(3d^2+3d-1))
  long ell3 = 1;  // gcd(3, d(d+1))
  long ell5 = 1;  // gcd(25, 3d^2+3d-1)
  std::set<Prime> T, R, Q;
  FactoredInteger N;
  Int D, S, Q2, K;  // d(d+1), 3d^2+3d-1, 2d+1, 16d^2+16d+3

  long min_exponent() const { return 2 * M; }
  bool overlap(Prime q) const { return R.count(q) && Q.count(q); }
};

DProfile profile(long d);

struct KappaBranch {
  std::map<Prime, Prime> kappa;  // active prime -> 1 or the prime itself

  Prime at(Prime q) const;
  std::string id() const;  // "k2=1,k5=5,k7=7"
  bool operator==(const KappaBranch&) const = default;
  bool operator<(const KappaBranch& o) const { return kappa < o.kappa; }
};

// "k2=2,k5=1"; unlisted active primes default to 1
KappaBranch parse_branch(const std::string& spec, const std::vector<Prime>& active);

enum class Alt { S, L };  // S: exponent grows with p; L: bounded valuation

struct ExponentChoice {
  Alt alt = Alt::S;
  Affine x;      // v_q(x)
  Affine pform;  // v_q(p(x^2, r^2))
};

// per-prime selection of dichotomy branch; missing primes use Alt::S
using AltSelection = std::map<Prime, Alt>;

struct Decomposition {
  long d = 0;
  KappaBranch branch;
  std::map<Prime, std::vector<ExponentChoice>> options;  // S alternative first

  const ExponentChoice& chosen(Prime q, const AltSelection& sel = {}) const;
  std::map<Prime, Affine> x_exponents(const AltSelection& sel = {}) const;
  std::map<Prime, Affine> pform_exponents(const AltSelection& sel = {}) const;

  struct Sets {
    std::set<Prime> S_eps, L_eps, S_delta, L_delta;
  };
  Sets branch_sets(const AltSelection& sel = {}) const;
};

std::vector<Prime> active_primes(const DProfile& prof);
std::vector<KappaBranch> kappa_branches(long d);
Decomposition decompose(long d, const KappaBranch& branch);
Decomposition decompose(const DProfile& prof, const KappaBranch& branch);

}  // namespace apfive
