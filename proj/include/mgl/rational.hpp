#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace mgl {

/// Exact rational scalar used for every probability and every value that
/// originates from rational input.
using Rational = mpq_class;

/// Parses "p/q", an integer, or a decimal literal ("0.25", "-1.5e-3")
/// into an exact rational. Decimals are read exactly (0.1 -> 1/10).
/// Throws InputError on malformed text or a zero denominator.
Rational parse_rational(std::string_view text);

/// Canonical "p/q" text, or "p" when the denominator is 1.
std::string to_string(const Rational& value);

/// The exact binary value of a finite double. Throws InputError on NaN/inf.
Rational from_double(double value);

inline double to_double(const Rational& value) { return value.get_d(); }

inline Rational abs(const Rational& value) { return value < 0 ? Rational(-value) : value; }

inline Rational positive_part(const Rational& value) { return value > 0 ? value : Rational(0); }

inline Rational negative_part(const Rational& value) { return value < 0 ? Rational(-value) : Rational(0); }

/// floor(value) as an exact integer-valued rational.
Rational floor(const Rational& value);

/// base^exponent for a nonnegative integer exponent.
Rational pow(const Rational& base, unsigned exponent);

/// Equality/ordering policy for theorem checks. Exact comparisons apply when
/// every participating value came from rational input; otherwise values are
/// compared with an absolute tolerance.
struct Comparison {
  bool exact = true;
  double tolerance = 1e-12;

  static Comparison for_inputs(bool all_exact, double tolerance = 1e-12) { return {all_exact, tolerance}; }

  bool equal(const Rational& a, const Rational& b) const;
  /// a <= b, allowing `tolerance` slack when inexact.
  bool less_equal(const Rational& a, const Rational& b) const;
  /// Sign of a - b with values within tolerance treated as zero.
  int sign_of_difference(const Rational& a, const Rational& b) const;
};

}  // namespace mgl
