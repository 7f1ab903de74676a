#pragma once

#include <vector>

#include "apfive/ntcore.hpp"

namespace apfive {

// sum_{i=-d}^{d} (x + i r)^5 = outer * x * (a1 x^4 + a2 x^2 r^2 + a3 r^4)
struct QuinticFactorization {
  long d = 0;
  long ell3 = 1;
  Rat outer;
  Int a1, a2, a3;

  Int form(const Int& x, const Int& r) const;  // a1 x^4 + a2 x^2 r^2 + a3 r^4
  Rat evaluate(const Int& x, const Int& r) const;
};

// sum_{i=-d}^{d} (x + i r)^k; direct sum cross-checked against the Bernoulli formula when r != 0
Int ap_power_sum(const Int& x, const Int& r, long d, unsigned k);
Int ap_power_sum_direct(const Int& x, const Int& r, long d, unsigned k);
Rat ap_power_sum_bernoulli(const Int& x, const Int& r, long d, unsigned k);

QuinticFactorization quintic_factorization(long d);

// pairwise gcd structure of d(d+1), 2d+1, 3d^2+3d-1
struct GcdFacts {
  Int g_q_t;  // gcd(2d+1, d(d+1))
  Int g_r_t;  // gcd(3d^2+3d-1, d(d+1))
  Int g_r_q;  // gcd(3d^2+3d-1, 2d+1)
};
GcdFacts gcd_facts(long d);

struct Solution {
  Int x, r, y;
  unsigned long p;
  bool operator<(const Solution& o) const {
    if (p != o.p) return p < o.p;
    if (x != o.x) return x < o.x;
    return r < o.r;
  }
};

// nonzero coprime (x, r) in the box with the quintic sum a perfect p-th power, y != 0
std::vector<Solution> search_solutions(long d, long x_bound, long r_bound, const std::vector<unsigned long>& p_set,
                                       unsigned threads = 0);

}  // namespace apfive
