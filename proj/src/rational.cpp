#include "mgl/rational.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>
#include <string>

#include "mgl/errors.hpp"

namespace mgl {
namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

std::string_view strip_sign(std::string_view s, bool& negative) {
  negative = false;
  if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  return s;
}

mpz_class parse_integer(std::string_view text, std::string_view whole) {
  bool negative = false;
  std::string_view digits = strip_sign(text, negative);
  if (!all_digits(digits)) throw InputError("malformed rational literal '" + std::string(whole) + "'");
  mpz_class z(std::string(digits), 10);
  return negative ? mpz_class(-z) : z;
}

Rational parse_decimal(std::string_view text) {
  const std::string_view whole = text;
  bool negative = false;
  text = strip_sign(text, negative);

  long exponent = 0;
  if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
    std::string_view exp_text = text.substr(e + 1);
    bool exp_negative = false;
    exp_text = strip_sign(exp_text, exp_negative);
    if (!all_digits(exp_text) || exp_text.size() > 6) {
      throw InputError("malformed rational literal '" + std::string(whole) + "'");
    }
    exponent = std::stol(std::string(exp_text));
    if (exp_negative) exponent = -exponent;
    text = text.substr(0, e);
  }

  std::string digits;
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string_view int_part = text.substr(0, dot);
    std::string_view frac_part = text.substr(dot + 1);
    if ((int_part.empty() && frac_part.empty()) || (!int_part.empty() && !all_digits(int_part)) ||
        (!frac_part.empty() && !all_digits(frac_part))) {
      throw InputError("malformed rational literal '" + std::string(whole) + "'");
    }
    digits = std::string(int_part) + std::string(frac_part);
    exponent -= static_cast<long>(frac_part.size());
  } else {
    if (!all_digits(text)) throw InputError("malformed rational literal '" + std::string(whole) + "'");
    digits = std::string(text);
  }

  mpz_class mantissa(digits, 10);
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(exponent < 0 ? -exponent : exponent));
  Rational result = exponent < 0 ? Rational(mantissa, scale) : Rational(mantissa * scale);
  result.canonicalize();
  return negative ? Rational(-result) : result;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (text.empty()) throw InputError("empty rational literal");

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    mpz_class num = parse_integer(text.substr(0, slash), text);
    mpz_class den = parse_integer(text.substr(slash + 1), text);
    if (den == 0) throw InputError("zero denominator in '" + std::string(text) + "'");
    Rational r(num, den);
    r.canonicalize();
    return r;
  }
  return parse_decimal(text);
}

std::string to_string(const Rational& value) {
  Rational canonical(value);
  canonical.canonicalize();
  return canonical.get_str(10);
}

Rational from_double(double value) {
  if (!std::isfinite(value)) throw InputError("non-finite value " + std::to_string(value));
  // mpq_set_d is exact for every finite double.
  Rational r;
  mpq_set_d(r.get_mpq_t(), value);
  return r;
}

Rational floor(const Rational& value) {
  mpz_class q;
  mpz_fdiv_q(q.get_mpz_t(), value.get_num_mpz_t(), value.get_den_mpz_t());
  return Rational(q);
}

Rational pow(const Rational& base, unsigned exponent) {
  Rational result(1);
  mpz_pow_ui(result.get_num_mpz_t(), base.get_num_mpz_t(), exponent);
  mpz_pow_ui(result.get_den_mpz_t(), base.get_den_mpz_t(), exponent);
  result.canonicalize();
  return result;
}

bool Comparison::equal(const Rational& a, const Rational& b) const { return sign_of_difference(a, b) == 0; }

bool Comparison::less_equal(const Rational& a, const Rational& b) const { return sign_of_difference(a, b) <= 0; }

int Comparison::sign_of_difference(const Rational& a, const Rational& b) const {
  if (exact) return sgn(Rational(a - b));
  const double diff = to_double(Rational(a - b));
  if (std::fabs(diff) <= tolerance) return 0;
  return diff < 0 ? -1 : 1;
}

}  // namespace mgl
