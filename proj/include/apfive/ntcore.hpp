#pragma once

#include <gmpxx.h>

#include <map>
#include <string>
#include <vector>

namespace apfive {

using Int = mpz_class;
using Rat = mpq_class;

bool is_prime(const Int& n);
std::vector<long> primes_upto(long n);

// sign * prod p^e; zero is not representable
class FactoredInteger {
 public:
  FactoredInteger() = default;  // 1
  static FactoredInteger of(const Int& n);  // throws on 0

  int sign() const { return sign_; }
  const std::map<Int, unsigned>& factors() const& { return factors_; }
  std::map<Int, unsigned> factors() && { return std::move(factors_); }
  Int value() const;
  unsigned exponent(const Int& q) const;
  Int radical() const;
  std::vector<Int> primes() const;
  std::string str() const;  // "2^6*5^2*7"

  FactoredInteger& operator*=(const FactoredInteger& o);
  friend FactoredInteger operator*(FactoredInteger a, const FactoredInteger& b) { return a *= b; }
  bool operator==(const FactoredInteger&) const = default;

  // building blocks; exponents must stay positive
  void set(const Int& prime, unsigned e);

 private:
  int sign_ = 1;
  std::map<Int, unsigned> factors_;
};

unsigned long valuation(const Int& n, const Int& q);
Int rad_excluding(const Int& m, const Int& n);
int kronecker_symbol(const Int& a, const Int& n);
Int mu_index(const Int& n);

// exact rational polynomial, coeffs[i] multiplies x^i
class RationalPolynomial {
 public:
  RationalPolynomial() = default;
  explicit RationalPolynomial(std::vector<Rat> c);

  int degree() const { return static_cast<int>(c_.size()) - 1; }  // -1 for zero
  const std::vector<Rat>& coeffs() const { return c_; }
  Rat coeff(int i) const { return i >= 0 && i < static_cast<int>(c_.size()) ? c_[i] : Rat(0); }
  Rat operator()(const Rat& x) const;
  bool is_zero() const { return c_.empty(); }

  RationalPolynomial operator+(const RationalPolynomial& o) const;
  RationalPolynomial operator-(const RationalPolynomial& o) const;
  RationalPolynomial operator*(const RationalPolynomial& o) const;
  RationalPolynomial operator*(const Rat& k) const;
  RationalPolynomial compose_shift(const Rat& a) const;  // f(x + a)
  bool operator==(const RationalPolynomial&) const = default;

  std::string str() const;

 private:
  void trim();
  std::vector<Rat> c_;
};

Rat bernoulli_number(unsigned k);  // B_1 = -1/2
RationalPolynomial bernoulli_polynomial(unsigned k);

// floor of the exact k-th root and whether it is exact (n may be negative for odd k)
struct RootResult {
  Int root;
  bool exact;
};
RootResult integer_root(const Int& n, unsigned long k);

}  // namespace apfive
