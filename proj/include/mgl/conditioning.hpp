#pragma once

// Conditional expectation given a sub-sigma-algebra, the Kolmogorov defining
// identity and the tower rule.

#include <optional>
#include <string>
#include <vector>

#include "mgl/integration.hpp"
#include "mgl/measure_core.hpp"

namespace mgl {

struct ConditionalReport {
  RandomVariable result;
  bool identity_checked = false;
  /// Atoms of probability zero on which the result was set to 0 by convention.
  std::vector<EventSet> null_atoms;
};

/// E[X | G]: the P-weighted average of X over each atom of G; 0 on atoms of
/// probability zero. Throws InputError when the spaces differ.
ConditionalReport conditional_expectation(const RandomVariable& x, const SigmaAlgebra& g,
                                          const ProbabilityMeasure& p, double tolerance = 1e-12);

struct KolmogorovVerdict {
  bool holds = false;
  /// Empty when `holds`; otherwise what failed and where.
  std::string reason;

  explicit operator bool() const { return holds; }
};

/// Checks that Y is G-measurable and that the integrals of X and Y agree over
/// every atom of G (which, by additivity, covers every set in G).
KolmogorovVerdict verify_kolmogorov(const RandomVariable& x, const SigmaAlgebra& g, const ProbabilityMeasure& p,
                                    const RandomVariable& y, double tolerance = 1e-12);

/// Throws PreconditionError naming the first H-atom that straddles two G-atoms.
void require_sub_sigma_algebra(const SigmaAlgebra& coarse, const SigmaAlgebra& fine);

struct TowerReport {
  RandomVariable given_coarse;      // E[X|G]
  RandomVariable fine_then_coarse;  // E[E[X|H] | G]
  RandomVariable coarse_then_fine;  // E[E[X|G] | H]
  bool fine_then_coarse_holds = false;
  bool coarse_then_fine_holds = false;

  bool holds() const { return fine_then_coarse_holds && coarse_then_fine_holds; }
};

/// Both nestings of the tower rule for G (coarse) contained in H (fine).
TowerReport tower_check(const RandomVariable& x, const SigmaAlgebra& coarse, const SigmaAlgebra& fine,
                        const ProbabilityMeasure& p, double tolerance = 1e-12);

}  // namespace mgl
