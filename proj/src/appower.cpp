#include "apfive/appower.hpp"

#include <algorithm>
#include <future>
#include <numeric>
#include <thread>

#include "apfive/error.hpp"

namespace apfive {

Int QuinticFactorization::form(const Int& x, const Int& r) const {
  Int x2 = x * x, r2 = r * r;
  return a1 * x2 * x2 + a2 * x2 * r2 + a3 * r2 * r2;
}

Rat QuinticFactorization::evaluate(const Int& x, const Int& r) const { return outer * x * form(x, r); }

Int ap_power_sum_direct(const Int& x, const Int& r, long d, unsigned k) {
  Int s = 0, t;
  for (long i = -d; i <= d; ++i) {
    Int b = x + i * r;
    mpz_pow_ui(t.get_mpz_t(), b.get_mpz_t(), k);
    s += t;
  }
  return s;
}

Rat ap_power_sum_bernoulli(const Int& x, const Int& r, long d, unsigned k) {
  if (r == 0) fail(ErrorKind::Argument, "Bernoulli formula needs r != 0");
  // sum_{j=0}^{2d} (u + j)^k with u = x/r - d, times r^k
  static thread_local std::vector<RationalPolynomial> cache;
  if (cache.size() <= k + 1) {
    for (unsigned j = cache.size(); j <= k + 1; ++j) cache.push_back(bernoulli_polynomial(j));
  }
  const auto& B = cache[k + 1];
  Rat u(x, r);
  u.canonicalize();
  Rat s = (B(u + d + 1) - B(u - d)) / (k + 1);
  Int rk;
  mpz_pow_ui(rk.get_mpz_t(), r.get_mpz_t(), k);
  return s * rk;
}

Int ap_power_sum(const Int& x, const Int& r, long d, unsigned k) {
  Int direct = ap_power_sum_direct(x, r, d, k);
  if (r != 0) {
    Rat b = ap_power_sum_bernoulli(x, r, d, k);
    APFIVE_ASSERT(b == Rat(direct), "Bernoulli formula disagrees with direct summation");
  }
  return direct;
}

QuinticFactorization quintic_factorization(long d) {
  if (d < 1) fail(ErrorKind::Argument, "d must be >= 1");
  QuinticFactorization q;
  q.d = d;
  Int D = Int(d) * (d + 1);
  Int S = 3 * D - 1;
  q.ell3 = mpz_divisible_ui_p(D.get_mpz_t(), 3) ? 3 : 1;
  q.outer = Rat(Int(q.ell3) * (2 * d + 1), 3);
  q.outer.canonicalize();
  q.a1 = 3 / q.ell3;
  q.a2 = 10 * D / q.ell3;
  q.a3 = D * S / q.ell3;
  // coefficients of the power sum as a polynomial in x, r: x^5 (2d+1), x^3 r^2 10*s2, x r^4 5*s4
  Int s2 = 0, s4 = 0;
  for (long i = 1; i <= d; ++i) {
    Int i2 = Int(i) * i;
    s2 += 2 * i2;
    s4 += 2 * i2 * i2;
  }
  APFIVE_ASSERT(q.outer * q.a1 == Rat(2 * d + 1), "x^5 coefficient");
  APFIVE_ASSERT(q.outer * q.a2 == Rat(10 * s2), "x^3 r^2 coefficient");
  APFIVE_ASSERT(q.outer * q.a3 == Rat(5 * s4), "x r^4 coefficient");
  return q;
}

GcdFacts gcd_facts(long d) {
  Int D = Int(d) * (d + 1), Q2 = 2 * d + 1, S = 3 * D - 1;
  return {gcd(Q2, D), gcd(S, D), gcd(S, Q2)};
}

std::vector<Solution> search_solutions(long d, long x_bound, long r_bound, const std::vector<unsigned long>& p_set,
                                       unsigned threads) {
  if (x_bound < 1 || r_bound < 1) fail(ErrorKind::Argument, "search bounds must be >= 1");
  for (auto p : p_set)
    if (p < 2) fail(ErrorKind::Argument, "exponents must be >= 2");
  auto qf = quintic_factorization(d);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, unsigned(2 * x_bound));
  auto work = [&](unsigned slot) {
    std::vector<Solution> out;
    for (long x = -x_bound + long(slot); x <= x_bound; x += threads) {
      if (x == 0) continue;
      for (long r = -r_bound; r <= r_bound; ++r) {
        if (r == 0 || std::gcd(x, r) != 1) continue;
        Rat v = qf.evaluate(x, r);
        APFIVE_ASSERT(v.get_den() == 1, "quintic value is integral");
        Int n = v.get_num();
        if (n == 0) continue;
        APFIVE_ASSERT(n == ap_power_sum_direct(x, r, d, 5), "factorized sum matches direct sum");
        for (auto p : p_set) {
          auto rr = integer_root(n, p);
          if (rr.exact && rr.root != 0) out.push_back({Int(x), Int(r), rr.root, p});
        }
      }
    }
    return out;
  };
  std::vector<std::future<std::vector<Solution>>> fs;
  for (unsigned t = 0; t < threads; ++t) fs.push_back(std::async(std::launch::async, work, t));
  std::vector<Solution> all;
  for (auto& f : fs) {
    auto part = f.get();
    all.insert(all.end(), part.begin(), part.end());
  }
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace apfive
