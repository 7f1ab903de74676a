#pragma once

#include <compare>
#include <string>

namespace apfive {

// alpha*p + beta, p being the (symbolic) exponent of the Diophantine equation
struct Affine {
  long alpha = 0;
  long beta = 0;

  constexpr Affine() = default;
  constexpr Affine(long b) : beta(b) {}  // NOLINT: constants convert implicitly
  constexpr Affine(long a, long b) : alpha(a), beta(b) {}

  constexpr long at(long p) const { return alpha * p + beta; }
  constexpr bool is_zero() const { return alpha == 0 && beta == 0; }
  constexpr bool is_const() const { return alpha == 0; }

  // order for p large enough: leading coefficient first
  constexpr auto operator<=>(const Affine&) const = default;

  friend constexpr Affine operator+(Affine x, Affine y) { return {x.alpha + y.alpha, x.beta + y.beta}; }
  friend constexpr Affine operator-(Affine x, Affine y) { return {x.alpha - y.alpha, x.beta - y.beta}; }
  friend constexpr Affine operator*(long k, Affine x) { return {k * x.alpha, k * x.beta}; }
  constexpr Affine operator-() const { return {-alpha, -beta}; }

  std::string str() const;  // "4p-5", "p", "2", "0"
};

inline std::string Affine::str() const {
  std::string s;
  if (alpha != 0) {
    if (alpha == -1) s = "-";
    else if (alpha != 1) s = std::to_string(alpha);
    s += "p";
    if (beta > 0) s += "+" + std::to_string(beta);
    else if (beta < 0) s += std::to_string(beta);
    return s;
  }
  return std::to_string(beta);
}

}  // namespace apfive
