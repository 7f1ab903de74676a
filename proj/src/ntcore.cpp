#include "apfive/ntcore.hpp"

#include <algorithm>
#include <sstream>

#include "apfive/error.hpp"

namespace apfive {

namespace {

constexpr unsigned long kTrialLimit = 1000000;

const std::vector<long>& small_primes() {
  static const std::vector<long> ps = primes_upto(kTrialLimit);
  return ps;
}

// Brent's variant; n odd composite, no small factors
Int pollard_rho(const Int& n) {
  for (unsigned long c = 1;; ++c) {
    Int x = 2, y = 2, g = 1, q = 1, ys, xs;
    unsigned long r = 1, m = 128;
    auto f = [&](const Int& v) {
      Int t = v * v + c;
      mpz_mod(t.get_mpz_t(), t.get_mpz_t(), n.get_mpz_t());
      return t;
    };
    do {
      x = y;
      for (unsigned long i = 0; i < r; ++i) y = f(y);
      unsigned long k = 0;
      do {
        ys = y;
        for (unsigned long i = 0; i < std::min(m, r - k); ++i) {
          y = f(y);
          Int diff = abs(x - y);
          q = q * diff % n;
        }
        g = gcd(q, n);
        k += m;
      } while (k < r && g == 1);
      r *= 2;
    } while (g == 1);
    if (g == n) {
      do {
        ys = f(ys);
        g = gcd(Int(abs(x - ys)), n);
      } while (g == 1);
    }
    if (g != n) return g;
  }
}

void factor_into(const Int& n, std::map<Int, unsigned>& out) {
  if (n == 1) return;
  if (is_prime(n)) {
    out[n] += 1;
    return;
  }
  Int d = pollard_rho(n);
  factor_into(d, out);
  factor_into(Int(n / d), out);
}

}  // namespace

bool is_prime(const Int& n) {
  if (n < 2) return false;
  return mpz_probab_prime_p(n.get_mpz_t(), 30) != 0;
}

std::vector<long> primes_upto(long n) {
  std::vector<long> out;
  if (n < 2) return out;
  std::vector<bool> comp(n + 1, false);
  for (long i = 2; i <= n; ++i) {
    if (comp[i]) continue;
    out.push_back(i);
    for (long j = i * i; j <= n; j += i) comp[j] = true;
  }
  return out;
}

FactoredInteger FactoredInteger::of(const Int& n) {
  if (n == 0) fail(ErrorKind::Argument, "cannot factor zero");
  FactoredInteger f;
  f.sign_ = sgn(n) < 0 ? -1 : 1;
  Int m = abs(n);
  for (long p : small_primes()) {
    if (m == 1) break;
    if (Int(p) * p > m) break;
    if (mpz_divisible_ui_p(m.get_mpz_t(), p)) {
      unsigned e = mpz_remove(m.get_mpz_t(), m.get_mpz_t(), Int(p).get_mpz_t());
      f.factors_[Int(p)] = e;
    }
  }
  factor_into(m, f.factors_);
  return f;
}

Int FactoredInteger::value() const {
  Int v = sign_;
  for (const auto& [p, e] : factors_) {
    Int t;
    mpz_pow_ui(t.get_mpz_t(), p.get_mpz_t(), e);
    v *= t;
  }
  return v;
}

unsigned FactoredInteger::exponent(const Int& q) const {
  auto it = factors_.find(q);
  return it == factors_.end() ? 0 : it->second;
}

Int FactoredInteger::radical() const {
  Int r = 1;
  for (const auto& kv : factors_) r *= kv.first;
  return r;
}

std::vector<Int> FactoredInteger::primes() const {
  std::vector<Int> out;
  for (const auto& kv : factors_) out.push_back(kv.first);
  return out;
}

std::string FactoredInteger::str() const {
  std::ostringstream os;
  if (sign_ < 0) os << "-";
  if (factors_.empty()) os << "1";
  bool first = true;
  for (const auto& [p, e] : factors_) {
    if (!first) os << "*";
    first = false;
    os << p.get_str();
    if (e > 1) os << "^" << e;
  }
  return os.str();
}

FactoredInteger& FactoredInteger::operator*=(const FactoredInteger& o) {
  sign_ *= o.sign_;
  for (const auto& [p, e] : o.factors_) factors_[p] += e;
  return *this;
}

void FactoredInteger::set(const Int& prime, unsigned e) {
  if (e == 0) factors_.erase(prime);
  else factors_[prime] = e;
}

unsigned long valuation(const Int& n, const Int& q) {
  if (n == 0) fail(ErrorKind::Argument, "valuation of zero");
  if (!is_prime(q)) fail(ErrorKind::Argument, "valuation base " + q.get_str() + " is not prime");
  Int m = n;
  return mpz_remove(m.get_mpz_t(), m.get_mpz_t(), q.get_mpz_t());
}

Int rad_excluding(const Int& m, const Int& n) {
  if (m == 0 || n == 0) fail(ErrorKind::Argument, "rad_excluding needs nonzero arguments");
  Int r = 1;
  for (const auto& kv : FactoredInteger::of(m).factors())
    if (!mpz_divisible_p(n.get_mpz_t(), kv.first.get_mpz_t())) r *= kv.first;
  return r;
}

int kronecker_symbol(const Int& a, const Int& n) { return mpz_kronecker(a.get_mpz_t(), n.get_mpz_t()); }

Int mu_index(const Int& n) {
  if (n < 1) fail(ErrorKind::Argument, "mu_index needs n >= 1");
  Int r = n;
  for (const auto& kv : FactoredInteger::of(n).factors()) r = r / kv.first * (kv.first + 1);
  return r;
}

// ---- polynomials

RationalPolynomial::RationalPolynomial(std::vector<Rat> c) : c_(std::move(c)) {
  for (auto& x : c_) x.canonicalize();
  trim();
}

void RationalPolynomial::trim() {
  while (!c_.empty() && c_.back() == 0) c_.pop_back();
}

Rat RationalPolynomial::operator()(const Rat& x) const {
  Rat acc = 0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

RationalPolynomial RationalPolynomial::operator+(const RationalPolynomial& o) const {
  std::vector<Rat> c(std::max(c_.size(), o.c_.size()));
  for (size_t i = 0; i < c.size(); ++i) c[i] = coeff(int(i)) + o.coeff(int(i));
  return RationalPolynomial(std::move(c));
}

RationalPolynomial RationalPolynomial::operator-(const RationalPolynomial& o) const { return *this + o * Rat(-1); }

RationalPolynomial RationalPolynomial::operator*(const RationalPolynomial& o) const {
  if (is_zero() || o.is_zero()) return {};
  std::vector<Rat> c(c_.size() + o.c_.size() - 1);
  for (size_t i = 0; i < c_.size(); ++i)
    for (size_t j = 0; j < o.c_.size(); ++j) c[i + j] += c_[i] * o.c_[j];
  return RationalPolynomial(std::move(c));
}

RationalPolynomial RationalPolynomial::operator*(const Rat& k) const {
  std::vector<Rat> c(c_);
  for (auto& x : c) x *= k;
  return RationalPolynomial(std::move(c));
}

RationalPolynomial RationalPolynomial::compose_shift(const Rat& a) const {
  // Horner in polynomial arithmetic
  RationalPolynomial lin({a, Rat(1)});
  RationalPolynomial acc;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * lin + RationalPolynomial({*it});
  return acc;
}

std::string RationalPolynomial::str() const {
  if (c_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (int i = degree(); i >= 0; --i) {
    const Rat& a = c_[i];
    if (a == 0) continue;
    Rat m = abs(a);
    os << (sgn(a) < 0 ? (first ? "-" : " - ") : (first ? "" : " + "));
    if (m != 1 || i == 0) os << m.get_str();
    if (i > 0) os << "x";
    if (i > 1) os << "^" << i;
    first = false;
  }
  return os.str();
}

Rat bernoulli_number(unsigned k) {
  // sum_{j<=m} C(m+1, j) B_j = 0
  std::vector<Rat> B(k + 1);
  B[0] = 1;
  for (unsigned m = 1; m <= k; ++m) {
    Rat s = 0;
    Int binom = 1;  // C(m+1, j)
    for (unsigned j = 0; j < m; ++j) {
      s += binom * B[j];
      binom = binom * (m + 1 - j) / (j + 1);
    }
    B[m] = -s / (m + 1);
  }
  return B[k];
}

RationalPolynomial bernoulli_polynomial(unsigned k) {
  std::vector<Rat> c(k + 1);
  Int binom = 1;  // C(k, j)
  for (unsigned j = 0; j <= k; ++j) {
    c[k - j] = binom * bernoulli_number(j);
    binom = binom * (k - j) / (j + 1);
  }
  return RationalPolynomial(std::move(c));
}

RootResult integer_root(const Int& n, unsigned long k) {
  if (k == 0) fail(ErrorKind::Argument, "zeroth root");
  if (n < 0 && k % 2 == 0) return {Int(0), false};
  Int a = abs(n), r;
  int exact = mpz_root(r.get_mpz_t(), a.get_mpz_t(), k);
  if (n < 0) r = -r;
  return {r, exact != 0};
}

}  // namespace apfive
