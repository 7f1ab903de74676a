#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "apfive/ternary.hpp"

namespace apfive {

enum class FreyFamily {
  Odd,   // Y^2 = X^3 + 2Cc X^2 + C*(slot term) X
  Even,  // Y^2 + XY = X^3 + ((Cc-1)/4) X^2 + (C*(slot term)/64) X
};

enum class Slot { A, B };  // which term of the ternary equation sits in the X coefficient

// 2-adic valuation of r for the secondary construction: 0, 1 or ">= 2"
enum class RTwo { Zero, One, AtLeastTwo };

struct FreyCurveModel {
  FreyFamily family = FreyFamily::Odd;
  Slot slot = Slot::B;
  TernaryEquation eq;
  std::optional<RTwo> r_two;
  std::string weierstrass;
  // valuation of the minimal discriminant: primes as decimal strings, plus "a", "b", "r"
  std::map<std::string, Affine> delta_profile;
  // conductor exponents on the N_d-supported part; rad(ab) is implicit
  std::map<Prime, long> conductor;
  long two_exponent = 0;  // conductor exponent at 2 after level lowering
  std::string two_case;   // which row of the 2-adic table applied

  Affine delta(Prime q) const;
};

FreyCurveModel attach_frey(const TernaryEquation& eq, std::optional<RTwo> r_two = std::nullopt);

struct LoweredLevel {
  Int N_f = 1;
  long delta = 0;              // exponent of 2
  std::string two_exponent_rule;
  bool pinned = false;         // delta taken from the fixed table rather than the generic recipe
  std::set<Prime> stripped;    // primes of N_E removed by level lowering (multiplicative there)
  std::set<Prime> additive;    // odd primes with exponent 2
};

LoweredLevel lowered_level(const FreyCurveModel& E, const std::set<Prime>& r_support = {});

enum class Construction { Primary, Secondary };
// convenience: build the equation, attach the curve, lower the level
LoweredLevel lowered_level(long d, const KappaBranch& branch, Construction c = Construction::Primary,
                           std::optional<RTwo> r_two = std::nullopt, const std::set<Prime>& r_support = {});

// trace of Frobenius of Y^2 + a1 XY + a3 Y = X^3 + a2 X^2 + a4 X + a6 over F_l, l odd prime
long count_points(const std::array<Int, 5>& ainvs, long ell);
// discriminant of the general Weierstrass model
Int weierstrass_discriminant(const std::array<Int, 5>& ainvs);

}  // namespace apfive
