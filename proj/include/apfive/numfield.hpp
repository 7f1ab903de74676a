#pragma once

#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "apfive/ntcore.hpp"

namespace apfive {

// Q[t]/(f), f monic with integer coefficients (low to high)
class NumberField {
 public:
  // checks monic, degree >= 1 and irreducibility over Q
  static std::shared_ptr<const NumberField> make(std::vector<Int> poly);
  // skip the irreducibility check (caller already validated)
  static std::shared_ptr<const NumberField> make_unchecked(std::vector<Int> poly);

  int degree() const { return static_cast<int>(poly_.size()) - 1; }
  const std::vector<Int>& poly() const { return poly_; }
  const std::vector<std::complex<long double>>& roots() const;  // numeric, cached at construction
  std::string str() const;

 private:
  explicit NumberField(std::vector<Int> poly);
  std::vector<Int> poly_;
  std::vector<std::complex<long double>> roots_;
};

using FieldPtr = std::shared_ptr<const NumberField>;

class NumberFieldElement {
 public:
  NumberFieldElement(FieldPtr field, std::vector<Rat> coords);
  static NumberFieldElement constant(FieldPtr field, const Rat& c);

  const FieldPtr& field() const { return field_; }
  const std::vector<Rat>& coords() const { return coords_; }

  NumberFieldElement operator+(const NumberFieldElement& o) const;
  NumberFieldElement operator-(const NumberFieldElement& o) const;
  NumberFieldElement operator*(const NumberFieldElement& o) const;
  bool operator==(const NumberFieldElement& o) const;

  bool is_rational() const;
  std::vector<std::complex<long double>> embeddings() const;
  // characteristic polynomial of multiplication by this element (monic, degree n)
  RationalPolynomial charpoly() const;

 private:
  FieldPtr field_;
  std::vector<Rat> coords_;
};

Rat nf_norm(const NumberFieldElement& e);
NumberFieldElement nf_sub_int(const NumberFieldElement& e, const Int& t);

// exact resultant of two rational polynomials
Rat resultant(const RationalPolynomial& f, const RationalPolynomial& g);

// numeric complex roots of an integer polynomial (companion eigenvalues, Newton-polished)
std::vector<std::complex<long double>> complex_roots(const std::vector<Int>& poly);

bool is_irreducible(const std::vector<Int>& poly);

}  // namespace apfive
