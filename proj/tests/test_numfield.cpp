#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "apfive/error.hpp"
#include "apfive/numfield.hpp"

using namespace apfive;

namespace {

FieldPtr field(std::vector<long> c) {
  std::vector<Int> p(c.begin(), c.end());
  return NumberField::make(p);
}

NumberFieldElement elt(const FieldPtr& K, std::vector<Rat> c) { return NumberFieldElement(K, std::move(c)); }

// product of the element over all numeric roots
long double embedding_norm(const NumberFieldElement& e) {
  std::complex<long double> prod = 1;
  for (const auto& v : e.embeddings()) prod *= v;
  return prod.real();
}

}  // namespace

TEST_CASE("norm examples") {
  auto phi = field({-1, -1, 1});
  CHECK(nf_norm(elt(phi, {3, -1})) == 5);
  auto sq2 = field({-2, 0, 1});
  CHECK(nf_norm(elt(sq2, {0, 1})) == -2);
  auto cubic = field({-2, 0, 0, 1});
  CHECK(nf_norm(NumberFieldElement::constant(cubic, Rat(3, 2))) == Rat(27, 8));
  auto Q = field({0, 1});
  CHECK(nf_norm(elt(Q, {Rat(-7, 3)})) == Rat(-7, 3));
}

TEST_CASE("subtracting integers") {
  auto phi = field({-1, -1, 1});
  auto e = nf_sub_int(elt(phi, {0, 1}), Int(3));
  CHECK(e.coords() == std::vector<Rat>{-3, 1});
  auto sq2 = field({-2, 0, 1});
  CHECK(nf_sub_int(elt(sq2, {1, 1}), Int(1)).coords() == std::vector<Rat>{0, 1});
  auto x = elt(sq2, {Rat(1, 3), 5});
  CHECK(nf_sub_int(x, Int(0)) == x);
}

TEST_CASE("ingestion checks") {
  CHECK_THROWS_AS(NumberField::make({Int(-4), Int(0), Int(1)}), Error);      // x^2 - 4 reducible
  CHECK_THROWS_AS(NumberField::make({Int(1), Int(0), Int(2)}), Error);       // not monic
  CHECK_THROWS_AS(NumberField::make({Int(2), Int(3), Int(1)}), Error);       // (x+1)(x+2)
  CHECK_THROWS_AS(NumberField::make({Int(1), Int(0), Int(2), Int(0), Int(1)}), Error);  // (x^2+1)^2
  CHECK_NOTHROW(NumberField::make({Int(1), Int(0), Int(0), Int(0), Int(1)}));  // x^4 + 1, reducible mod every p
  auto K = field({-2, 0, 1});
  CHECK_THROWS_AS(elt(K, {1, 2, 3}), Error);
}

TEST_CASE("irreducibility on a product of two quartics") {
  // (x^4 - 2)(x^4 + x + 1) has no rational roots; the degree-set sieve alone must not accept it
  std::vector<Int> f{-2, -2, -1, 0, 1, 1, 0, 0, 1};
  CHECK_FALSE(is_irreducible(f));
  CHECK(is_irreducible({Int(-2), Int(0), Int(0), Int(0), Int(1)}));
}

TEST_CASE("norm is multiplicative and matches the embedding product") {
  std::vector<std::vector<long>> polys = {{-1, -1, 1},
                                          {-2, 0, 0, 1},
                                          {1, -1, -4, 0, 1},
                                          {-1, 8, 0, -6, 0, 1},
                                          {-4, -1, 14, 0, -8, 0, 1},
                                          {3, 3, -5, -1, 1}};
  std::mt19937_64 rng(23);
  for (const auto& p : polys) {
    auto K = field(p);
    int n = K->degree();
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<Rat> a(n), b(n);
      for (int i = 0; i < n; ++i) {
        a[i] = Rat(long(rng() % 11) - 5, 1 + long(rng() % 3));
        b[i] = Rat(long(rng() % 11) - 5);
      }
      a[0] += 1;  // keep away from zero
      auto x = elt(K, a), y = elt(K, b);
      CHECK(nf_norm(x * y) == nf_norm(x) * nf_norm(y));
      long double exact = nf_norm(x).get_d();
      long double num = embedding_norm(x);
      CHECK(std::abs(num - exact) <= 1e-6L * std::max<long double>(1, std::abs(exact)));
    }
  }
}

TEST_CASE("characteristic polynomial relation") {
  auto K = field({3, 3, -5, -1, 1});
  auto a = elt(K, {1, -2, 0, 1});
  auto cp = a.charpoly();
  CHECK(cp.degree() == 4);
  CHECK(cp.coeff(4) == 1);
  for (long t = -6; t <= 6; ++t) {
    Rat lhs = nf_norm(nf_sub_int(a, Int(t)));
    CHECK(lhs == cp(Rat(t)));  // even degree: Norm(a - t) = charpoly(t)
  }
  auto cub = field({-2, 0, 0, 1});
  auto b = elt(cub, {0, 1, 0});
  CHECK(b.charpoly() == RationalPolynomial({-2, 0, 0, 1}));
  CHECK(nf_norm(nf_sub_int(b, Int(1))) == -b.charpoly()(Rat(1)));
}

TEST_CASE("arithmetic reduces modulo the defining polynomial") {
  auto K = field({-2, 0, 1});
  auto t = elt(K, {0, 1});
  CHECK(t * t == NumberFieldElement::constant(K, 2));
  CHECK((t + t - t) == t);
  CHECK(NumberFieldElement::constant(K, 5).is_rational());
  CHECK_FALSE(t.is_rational());
}

TEST_CASE("resultant") {
  RationalPolynomial f({-1, -1, 1}), g({3, -1});
  CHECK(resultant(f, g) == 5);
  RationalPolynomial h({-2, 0, 1}), x({0, 1});
  CHECK(resultant(h, x) == -2);
}
