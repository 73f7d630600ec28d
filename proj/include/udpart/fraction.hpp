#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace udpart {

using BigInt = mpz_class;

/// Exact rational number, always in lowest terms with a positive denominator.
///
/// Thin value wrapper over GMP's mpq_class. All lengths and breakpoints in the
/// library are Fractions; nothing is ever rounded. Irrational parameters must be
/// approximated by a rational before they enter the library.
class Fraction {
 public:
  Fraction() = default;
  Fraction(long value) : value_(value) {}  // NOLINT(google-explicit-constructor)
  Fraction(const BigInt& num, const BigInt& den);
  Fraction(long num, long den);
  explicit Fraction(mpq_class value);

  /// Parses "p/q" or "p" (optional leading '-'); throws std::invalid_argument.
  static Fraction parse(std::string_view text);

  /// 2^{-exponent}.
  static Fraction inverse_power_of_two(unsigned exponent);

  [[nodiscard]] BigInt numerator() const { return value_.get_num(); }
  [[nodiscard]] BigInt denominator() const { return value_.get_den(); }
  [[nodiscard]] const mpq_class& raw() const { return value_; }

  [[nodiscard]] bool is_zero() const { return sgn(value_) == 0; }
  [[nodiscard]] int sign() const { return sgn(value_); }
  [[nodiscard]] std::size_t denominator_bits() const;

  [[nodiscard]] double to_double() const { return value_.get_d(); }
  /// "p/q", or "p" when the denominator is one.
  [[nodiscard]] std::string str() const;
  /// Decimal rendering with the given number of significant digits.
  [[nodiscard]] std::string decimal(int significant_digits = 12) const;

  Fraction& operator+=(const Fraction& rhs) { value_ += rhs.value_; return *this; }
  Fraction& operator-=(const Fraction& rhs) { value_ -= rhs.value_; return *this; }
  Fraction& operator*=(const Fraction& rhs) { value_ *= rhs.value_; return *this; }
  Fraction& operator/=(const Fraction& rhs);

  friend Fraction operator+(Fraction lhs, const Fraction& rhs) { return lhs += rhs; }
  friend Fraction operator-(Fraction lhs, const Fraction& rhs) { return lhs -= rhs; }
  friend Fraction operator*(Fraction lhs, const Fraction& rhs) { return lhs *= rhs; }
  friend Fraction operator/(Fraction lhs, const Fraction& rhs) { return lhs /= rhs; }
  friend Fraction operator-(const Fraction& x) { return Fraction(mpq_class(-x.value_)); }

  friend bool operator==(const Fraction& a, const Fraction& b) { return cmp(a.value_, b.value_) == 0; }
  friend std::strong_ordering operator<=>(const Fraction& a, const Fraction& b) {
    const int c = cmp(a.value_, b.value_);
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

  friend std::ostream& operator<<(std::ostream& os, const Fraction& f);

 private:
  mpq_class value_;
};

Fraction abs(const Fraction& x);
Fraction pow(const Fraction& base, unsigned exponent);

/// floor(x * 2^level) as an arbitrary-precision integer.
BigInt floor_scaled(const Fraction& x, unsigned level);
/// ceil(x * 2^level).
BigInt ceil_scaled(const Fraction& x, unsigned level);

struct FractionHash {
  std::size_t operator()(const Fraction& f) const;
};

}  // namespace udpart
