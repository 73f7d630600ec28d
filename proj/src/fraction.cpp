#include "udpart/fraction.hpp"

#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace udpart {

Fraction::Fraction(const BigInt& num, const BigInt& den) : value_(num, den) {
  if (den == 0) throw std::invalid_argument("Fraction: zero denominator");
  value_.canonicalize();
}

Fraction::Fraction(long num, long den) : Fraction(BigInt(num), BigInt(den)) {}

Fraction::Fraction(mpq_class value) : value_(std::move(value)) { value_.canonicalize(); }

namespace {

bool is_integer_literal(std::string_view s) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  return true;
}

BigInt parse_integer(std::string_view s) {
  if (!s.empty() && s[0] == '+') s.remove_prefix(1);
  return BigInt(std::string(s), 10);
}

}  // namespace

Fraction Fraction::parse(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
  const auto slash = text.find('/');
  const std::string_view num = text.substr(0, slash);
  const std::string_view den =
      slash == std::string_view::npos ? std::string_view("1") : text.substr(slash + 1);
  if (!is_integer_literal(num) || !is_integer_literal(den) || den[0] == '-') {
    throw std::invalid_argument("not a rational literal: '" + std::string(text) + "'");
  }
  const BigInt d = parse_integer(den);
  if (d == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
  return Fraction(parse_integer(num), d);
}

Fraction Fraction::inverse_power_of_two(unsigned exponent) {
  BigInt den;
  mpz_ui_pow_ui(den.get_mpz_t(), 2, exponent);
  return Fraction(BigInt(1), den);
}

std::size_t Fraction::denominator_bits() const {
  return mpz_sizeinbase(value_.get_den_mpz_t(), 2);
}

std::string Fraction::str() const {
  if (value_.get_den() == 1) return value_.get_num().get_str();
  return value_.get_num().get_str() + "/" + value_.get_den().get_str();
}

std::string Fraction::decimal(int significant_digits) const {
  mpf_class f(value_, 256);
  std::ostringstream os;
  // mpf formatting through iostream honors setprecision as significant digits.
  os << std::setprecision(significant_digits) << f;
  return os.str();
}

Fraction& Fraction::operator/=(const Fraction& rhs) {
  if (rhs.is_zero()) throw std::domain_error("Fraction: division by zero");
  value_ /= rhs.value_;
  return *this;
}

std::ostream& operator<<(std::ostream& os, const Fraction& f) { return os << f.str(); }

Fraction abs(const Fraction& x) { return x.sign() < 0 ? -x : x; }

Fraction pow(const Fraction& base, unsigned exponent) {
  BigInt num, den;
  mpz_pow_ui(num.get_mpz_t(), base.raw().get_num_mpz_t(), exponent);
  mpz_pow_ui(den.get_mpz_t(), base.raw().get_den_mpz_t(), exponent);
  return Fraction(num, den);
}

BigInt floor_scaled(const Fraction& x, unsigned level) {
  BigInt num = x.raw().get_num();
  num <<= level;
  BigInt out;
  mpz_fdiv_q(out.get_mpz_t(), num.get_mpz_t(), x.raw().get_den_mpz_t());
  return out;
}

BigInt ceil_scaled(const Fraction& x, unsigned level) {
  BigInt num = x.raw().get_num();
  num <<= level;
  BigInt out;
  mpz_cdiv_q(out.get_mpz_t(), num.get_mpz_t(), x.raw().get_den_mpz_t());
  return out;
}

std::size_t FractionHash::operator()(const Fraction& f) const {
  const std::size_t hn = mpz_get_ui(f.raw().get_num_mpz_t());
  const std::size_t hd = mpz_get_ui(f.raw().get_den_mpz_t());
  return hn * 0x9E3779B97F4A7C15ULL ^ (hd + (hn << 6) + (hn >> 2));
}

}  // namespace udpart
