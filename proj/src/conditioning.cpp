#include "mgl/conditioning.hpp"

#include "mgl/errors.hpp"

namespace mgl {

ConditionalReport conditional_expectation(const RandomVariable& x, const SigmaAlgebra& g,
                                          const ProbabilityMeasure& p, double tolerance) {
  require_same_space(x.space(), g.space(), "conditional_expectation");
  require_same_space(x.space(), p.space(), "conditional_expectation");

  std::vector<Rational> values(x.size());
  std::vector<EventSet> null_atoms;
  for (const auto& atom : g.atoms()) {
    const Rational mass = measure_of(p, atom);
    Rational average(0);
    if (mass == 0) {
      null_atoms.push_back(atom);
    } else {
      average = integrate_over(x, p, atom) / mass;
    }
    for (std::size_t outcome : atom.members()) values[outcome] = average;
  }

  ConditionalReport report{RandomVariable(x.space(), std::move(values), x.exact()), false, std::move(null_atoms)};
  report.identity_checked = verify_kolmogorov(x, g, p, report.result, tolerance).holds;
  return report;
}

KolmogorovVerdict verify_kolmogorov(const RandomVariable& x, const SigmaAlgebra& g, const ProbabilityMeasure& p,
                                    const RandomVariable& y, double tolerance) {
  require_same_space(x.space(), g.space(), "verify_kolmogorov");
  require_same_space(x.space(), p.space(), "verify_kolmogorov");
  require_same_space(x.space(), y.space(), "verify_kolmogorov");

  for (std::size_t a = 0; a < g.atom_count(); ++a) {
    const auto& atom = g.atoms()[a];
    const Rational& first = y[atom.members().front()];
    for (std::size_t outcome : atom.members()) {
      if (y[outcome] != first) {
        return {false, "candidate is not measurable: it varies on atom " + std::to_string(a)};
      }
    }
  }

  const auto cmp = Comparison::for_inputs(x.exact() && y.exact(), tolerance);
  for (std::size_t a = 0; a < g.atom_count(); ++a) {
    const auto& atom = g.atoms()[a];
    const Rational lhs = integrate_over(x, p, atom);
    const Rational rhs = integrate_over(y, p, atom);
    if (!cmp.equal(lhs, rhs)) {
      return {false, "integrals differ on atom " + std::to_string(a) + ": " + to_string(lhs) + " vs " +
                         to_string(rhs)};
    }
  }
  return {true, {}};
}

void require_sub_sigma_algebra(const SigmaAlgebra& coarse, const SigmaAlgebra& fine) {
  require_same_space(coarse.space(), fine.space(), "sub-sigma-algebra test");
  for (std::size_t a = 0; a < fine.atom_count(); ++a) {
    const auto& atom = fine.atoms()[a];
    const std::size_t home = coarse.atom_of(atom.members().front());
    for (std::size_t outcome : atom.members()) {
      if (coarse.atom_of(outcome) != home) {
        throw PreconditionError("coarse sigma-algebra is not contained in the fine one: fine atom " +
                                std::to_string(a) + " meets coarse atoms " + std::to_string(home) + " and " +
                                std::to_string(coarse.atom_of(outcome)));
      }
    }
  }
}

TowerReport tower_check(const RandomVariable& x, const SigmaAlgebra& coarse, const SigmaAlgebra& fine,
                        const ProbabilityMeasure& p, double tolerance) {
  require_sub_sigma_algebra(coarse, fine);
  RandomVariable given_coarse = conditional_expectation(x, coarse, p, tolerance).result;
  RandomVariable given_fine = conditional_expectation(x, fine, p, tolerance).result;
  RandomVariable fine_then_coarse = conditional_expectation(given_fine, coarse, p, tolerance).result;
  RandomVariable coarse_then_fine = conditional_expectation(given_coarse, fine, p, tolerance).result;

  TowerReport report{given_coarse, fine_then_coarse, coarse_then_fine, false, false};
  // Conditional expectations are unique only almost surely; null atoms of H
  // carry the convention value.
  report.fine_then_coarse_holds = almost_surely_equal(fine_then_coarse, given_coarse, p, tolerance);
  report.coarse_then_fine_holds = almost_surely_equal(coarse_then_fine, given_coarse, p, tolerance);
  return report;
}

}  // namespace mgl
