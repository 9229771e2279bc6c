#pragma once

#include <compare>
#include <cstdint>
#include <numeric>
#include <string>

namespace shapecap {

// Exact rational arithmetic for quantifier thresholds and comparative
// ratios. Values stay tiny (counts and lexicon fractions), so int64
// cross-multiplication never overflows.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;  // > 0 after normalization

  constexpr Rational() = default;
  constexpr Rational(std::int64_t n, std::int64_t d = 1) : num(n), den(d) {
    normalize();
  }

  constexpr void normalize() {
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  friend constexpr bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
  }
  friend constexpr std::strong_ordering operator<=>(const Rational& a,
                                                    const Rational& b) {
    return a.num * b.den <=> b.num * a.den;
  }
  friend constexpr Rational operator*(const Rational& a, const Rational& b) {
    return Rational(a.num * b.num, a.den * b.den);
  }

  std::string str() const {
    return den == 1 ? std::to_string(num)
                    : std::to_string(num) + "/" + std::to_string(den);
  }
};

}  // namespace shapecap
