#include "mgl/integration.hpp"

#include <algorithm>
#include <map>

#include "mgl/errors.hpp"

namespace mgl {

RandomVariable::RandomVariable(SpacePtr space, std::vector<Rational> values, bool exact)
    : space_(std::move(space)), values_(std::move(values)), exact_(exact) {
  if (!space_) throw InputError("random variable requires a sample space");
  if (values_.size() != space_->size()) {
    throw InputError("random variable has " + std::to_string(values_.size()) + " values for a space of size " +
                     std::to_string(space_->size()));
  }
}

RandomVariable RandomVariable::from_doubles(SpacePtr space, std::span<const double> values) {
  std::vector<Rational> exact_values;
  exact_values.reserve(values.size());
  for (double v : values) exact_values.push_back(from_double(v));
  return RandomVariable(std::move(space), std::move(exact_values), false);
}

RandomVariable RandomVariable::constant(SpacePtr space, const Rational& c) {
  const std::size_t n = space->size();
  return RandomVariable(std::move(space), std::vector<Rational>(n, c));
}

namespace {

template <typename Op>
RandomVariable combine(const RandomVariable& a, const RandomVariable& b, Op op) {
  require_same_space(a.space(), b.space(), "random variable arithmetic");
  std::vector<Rational> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = op(a[i], b[i]);
  return RandomVariable(a.space(), std::move(out), a.exact() && b.exact());
}

}  // namespace

RandomVariable operator+(const RandomVariable& a, const RandomVariable& b) {
  return combine(a, b, [](const Rational& x, const Rational& y) { return Rational(x + y); });
}

RandomVariable operator-(const RandomVariable& a, const RandomVariable& b) {
  return combine(a, b, [](const Rational& x, const Rational& y) { return Rational(x - y); });
}

RandomVariable operator*(const RandomVariable& a, const RandomVariable& b) {
  return combine(a, b, [](const Rational& x, const Rational& y) { return Rational(x * y); });
}

RandomVariable operator*(const Rational& c, const RandomVariable& x) {
  std::vector<Rational> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = c * x[i];
  return RandomVariable(x.space(), std::move(out), x.exact());
}

RandomVariable RandomVariable::operator-() const { return Rational(-1) * *this; }

bool pointwise_equal(const RandomVariable& a, const RandomVariable& b, double tolerance) {
  if (!same_space(a.space(), b.space())) return false;
  const auto cmp = Comparison::for_inputs(a.exact() && b.exact(), tolerance);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!cmp.equal(a[i], b[i])) return false;
  }
  return true;
}

bool almost_surely_equal(const RandomVariable& a, const RandomVariable& b, const ProbabilityMeasure& p,
                         double tolerance) {
  if (!same_space(a.space(), b.space()) || !same_space(a.space(), p.space())) return false;
  const auto cmp = Comparison::for_inputs(a.exact() && b.exact(), tolerance);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (p.weight(i) > 0 && !cmp.equal(a[i], b[i])) return false;
  }
  return true;
}

RandomVariable SimpleFunctionForm::evaluate(const SpacePtr& space) const {
  std::vector<Rational> values(space->size(), Rational(0));
  for (const auto& term : terms) {
    for (std::size_t outcome : term.set.members()) values.at(outcome) += term.coefficient;
  }
  return RandomVariable(space, std::move(values));
}

RandomVariable indicator(const SpacePtr& space, const EventSet& event) {
  std::vector<Rational> values(space->size(), Rational(0));
  for (std::size_t outcome : event.members()) values.at(outcome) = 1;
  return RandomVariable(space, std::move(values));
}

EventSet preimage(const RandomVariable& x, std::span<const Rational> values) {
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::find(values.begin(), values.end(), x[i]) != values.end()) members.push_back(i);
  }
  return EventSet::of(std::move(members), x.size());
}

bool is_measurable(const RandomVariable& x, const SigmaAlgebra& sigma) {
  require_same_space(x.space(), sigma.space(), "is_measurable");
  for (const auto& atom : sigma.atoms()) {
    const Rational& first = x[atom.members().front()];
    for (std::size_t outcome : atom.members()) {
      if (x[outcome] != first) return false;
    }
  }
  return true;
}

SimpleFunctionForm to_simple_form(const RandomVariable& x) {
  std::map<Rational, std::size_t> slot;
  std::vector<std::pair<Rational, std::vector<std::size_t>>> levels;
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto [it, inserted] = slot.try_emplace(x[i], levels.size());
    if (inserted) levels.push_back({x[i], {}});
    levels[it->second].second.push_back(i);
  }
  SimpleFunctionForm form;
  form.terms.reserve(levels.size());
  for (auto& [value, members] : levels) {
    form.terms.push_back({value, EventSet::of(std::move(members), x.size())});
  }
  return form;
}

Rational integrate_simple(const SimpleFunctionForm& g, const ProbabilityMeasure& mu) {
  Rational total(0);
  for (const auto& term : g.terms) total += term.coefficient * measure_of(mu, term.set);
  return total;
}

Rational integrate_over(const RandomVariable& x, const ProbabilityMeasure& p, const EventSet& event) {
  Rational total(0);
  for (std::size_t outcome : event.members()) total += x.at(outcome) * p.weight(outcome);
  return total;
}

Rational expectation(const RandomVariable& x, const ProbabilityMeasure& p) {
  require_same_space(x.space(), p.space(), "expectation");
  return integrate_simple(to_simple_form(x), p);
}

std::pair<RandomVariable, RandomVariable> pos_neg_split(const RandomVariable& x) {
  std::vector<Rational> plus(x.size()), minus(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    plus[i] = positive_part(x[i]);
    minus[i] = negative_part(x[i]);
  }
  return {RandomVariable(x.space(), std::move(plus), x.exact()),
          RandomVariable(x.space(), std::move(minus), x.exact())};
}

SimpleFunctionForm staircase_approximation(const RandomVariable& f, unsigned level) {
  if (level < 1) throw InputError("staircase level must be >= 1");
  const Rational scale = pow(Rational(2), level);
  const Rational cap(level);
  std::vector<Rational> values(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] < 0) {
      throw DomainError("staircase approximation needs a nonnegative function; value " + to_string(f[i]) +
                        " at outcome " + std::to_string(i));
    }
    Rational step = floor(Rational(scale * f[i])) / scale;
    values[i] = std::min(cap, step);
  }
  return to_simple_form(RandomVariable(f.space(), std::move(values)));
}

}  // namespace mgl
