#pragma once

#include <map>
#include <string>

#include "apfive/valprof.hpp"

namespace apfive {

// disc x^2 + 4 a3 p(x,y) = (a2 x + 2 a3 y)^2 and disc y^2 + 4 a1 p(x,y) = (2 a1 x + a2 y)^2
// with p(x,y) = a1 x^2 + a2 x y + a3 y^2 and disc = a2^2 - 4 a1 a3
struct QuadraticIdentity {
  Int a1, a2, a3;
  Int disc;
  Int lin_x, lin_y;  // a2, 2 a3
  Int sym_x, sym_y;  // 2 a1, a2
};

QuadraticIdentity quadratic_identity(const Int& a1, const Int& a2, const Int& a3);

enum class Signature { S4pp2, Spp2 };

// sign * prod q^{e_q(p)} * r^{r_power}
struct Coefficient {
  int sign = 1;
  std::map<Prime, Affine> exps;
  int r_power = 0;

  Int at(long p) const;  // r factor omitted
  Affine exponent(Prime q) const;
  std::string str() const;  // "5^(4p-5)*7^(4p-10)*13"
};

// c = (u x^2 + w r^2) / den, gcd(u, w, den) = 1, den > 0
struct CExpr {
  Int u, w, den;
  Int eval_num(const Int& x, const Int& r) const { return u * x * x + w * r * r; }
  std::string str() const;
};

// A * a^{4p} + B * b^p = C * c^2   (S4pp2)
// A * 1^p   + B * b^p = C * c^2   (Spp2, A carries r^4)
struct TernaryEquation {
  Signature signature = Signature::S4pp2;
  long d = 0;
  KappaBranch branch;
  bool secondary = false;
  AltSelection selection;
  bool bounded_alternative = false;  // some prime uses the bounded (L) alternative

  Coefficient A, B;
  Int C = 1;
  CExpr c;

  // bookkeeping record: the original terms are A*q^m, B*q^m, C*c^2*q^m
  std::map<Prime, Affine> common;
  std::map<Prime, Affine> x_exps, pform_exps;

  std::string str() const;
};

TernaryEquation build_ternary(long d, const KappaBranch& branch, const AltSelection& sel = {});
TernaryEquation build_second_ternary(long d, const KappaBranch& branch, const AltSelection& sel = {});

}  // namespace apfive
