#pragma once

// Random variables on finite spaces, simple functions and the integral.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "mgl/measure_core.hpp"
#include "mgl/rational.hpp"

namespace mgl {

/// One value per outcome. Values built from doubles are stored as their exact
/// binary rationals but mark the variable inexact, which switches theorem
/// checks that involve it to tolerance comparison.
class RandomVariable {
 public:
  RandomVariable(SpacePtr space, std::vector<Rational> values, bool exact = true);
  /// Throws InputError on a non-finite value.
  static RandomVariable from_doubles(SpacePtr space, std::span<const double> values);
  static RandomVariable constant(SpacePtr space, const Rational& c);

  const SpacePtr& space() const { return space_; }
  std::size_t size() const { return values_.size(); }
  const Rational& operator[](std::size_t outcome) const { return values_[outcome]; }
  const Rational& at(std::size_t outcome) const { return values_.at(outcome); }
  const std::vector<Rational>& values() const { return values_; }
  bool exact() const { return exact_; }

  friend RandomVariable operator+(const RandomVariable& a, const RandomVariable& b);
  friend RandomVariable operator-(const RandomVariable& a, const RandomVariable& b);
  /// Pointwise product.
  friend RandomVariable operator*(const RandomVariable& a, const RandomVariable& b);
  friend RandomVariable operator*(const Rational& c, const RandomVariable& x);
  RandomVariable operator-() const;

  bool operator==(const RandomVariable& other) const { return values_ == other.values_; }

 private:
  SpacePtr space_;
  std::vector<Rational> values_;
  bool exact_ = true;
};

/// Pointwise comparison under the policy implied by both operands.
bool pointwise_equal(const RandomVariable& a, const RandomVariable& b, double tolerance = 1e-12);

/// Equality on every outcome of positive probability.
bool almost_surely_equal(const RandomVariable& a, const RandomVariable& b, const ProbabilityMeasure& p,
                         double tolerance = 1e-12);

struct SimpleTerm {
  Rational coefficient;
  EventSet set;

  bool operator==(const SimpleTerm&) const = default;
};

/// g = sum_i a_i 1_{A_i}. The canonical form produced by to_simple_form has
/// disjoint level sets with distinct coefficients ordered by smallest member;
/// integrate_simple also accepts arbitrary (overlapping) term lists.
struct SimpleFunctionForm {
  std::vector<SimpleTerm> terms;

  RandomVariable evaluate(const SpacePtr& space) const;
  bool operator==(const SimpleFunctionForm&) const = default;
};

RandomVariable indicator(const SpacePtr& space, const EventSet& event);

/// {omega : X(omega) in values}. On a finite space every Borel set acts on X
/// only through the finitely many values it contains.
EventSet preimage(const RandomVariable& x, std::span<const Rational> values);

/// X is constant on every atom of `sigma`.
bool is_measurable(const RandomVariable& x, const SigmaAlgebra& sigma);

SimpleFunctionForm to_simple_form(const RandomVariable& x);

Rational integrate_simple(const SimpleFunctionForm& g, const ProbabilityMeasure& mu);

/// Sum over `event` of X(omega) P(omega), i.e. the integral of X over the event.
Rational integrate_over(const RandomVariable& x, const ProbabilityMeasure& p, const EventSet& event);

Rational expectation(const RandomVariable& x, const ProbabilityMeasure& p);

/// (X+, X-) with X = X+ - X-.
std::pair<RandomVariable, RandomVariable> pos_neg_split(const RandomVariable& x);

/// phi_n = min(n, floor(2^n f) / 2^n). Throws DomainError when f has a
/// negative value and InputError when level < 1.
SimpleFunctionForm staircase_approximation(const RandomVariable& f, unsigned level);

}  // namespace mgl
