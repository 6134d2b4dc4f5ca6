#pragma once

// Finite sample spaces, events, sigma-algebras (stored as atom partitions)
// and exact probability measures.

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mgl/rational.hpp"

namespace mgl {

class SampleSpace {
 public:
  /// Throws InputError if `labels` is empty or contains duplicates.
  explicit SampleSpace(std::vector<std::string> labels);

  /// Space with labels "0", "1", ..., "n-1".
  static std::shared_ptr<const SampleSpace> indexed(std::size_t size);

  std::size_t size() const { return labels_.size(); }
  const std::string& label(std::size_t index) const { return labels_.at(index); }
  const std::vector<std::string>& labels() const { return labels_; }

  bool operator==(const SampleSpace&) const = default;

 private:
  std::vector<std::string> labels_;
};

using SpacePtr = std::shared_ptr<const SampleSpace>;

SpacePtr make_space(std::vector<std::string> labels);

/// True when both pointers name the same space or structurally equal ones.
bool same_space(const SpacePtr& a, const SpacePtr& b);

/// Throws InputError naming `context` when the spaces differ.
void require_same_space(const SpacePtr& a, const SpacePtr& b, const char* context);

/// A subset of a sample space as ascending, duplicate-free outcome indices.
class EventSet {
 public:
  EventSet() = default;

  /// Validates against `space_size` and sorts. Throws InputError on an
  /// out-of-range or repeated index.
  static EventSet of(std::vector<std::size_t> indices, std::size_t space_size);
  static EventSet full(std::size_t space_size);

  const std::vector<std::size_t>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  bool contains(std::size_t index) const;
  bool is_subset_of(const EventSet& other) const;

  EventSet unite(const EventSet& other) const;
  EventSet intersect(const EventSet& other) const;
  EventSet complement(std::size_t space_size) const;

  auto operator<=>(const EventSet&) const = default;

 private:
  explicit EventSet(std::vector<std::size_t> sorted) : members_(std::move(sorted)) {}
  std::vector<std::size_t> members_;
};

/// A finite sigma-algebra, represented by its atom partition. Atoms are kept
/// in canonical order (ascending smallest member).
class SigmaAlgebra {
 public:
  /// Validates that `atoms` is a partition of the space into nonempty sets.
  static SigmaAlgebra from_partition(SpacePtr space, std::vector<EventSet> atoms);
  /// {empty, space}
  static SigmaAlgebra trivial(SpacePtr space);
  /// The power set (singleton atoms).
  static SigmaAlgebra discrete(SpacePtr space);

  const SpacePtr& space() const { return space_; }
  const std::vector<EventSet>& atoms() const { return atoms_; }
  std::size_t atom_count() const { return atoms_.size(); }
  /// Index of the atom containing `outcome`.
  std::size_t atom_of(std::size_t outcome) const { return atom_of_.at(outcome); }

  /// True iff every atom of *this lies inside an atom of `coarser`, i.e.
  /// `coarser` is a sub-sigma-algebra of *this.
  bool refines(const SigmaAlgebra& coarser) const;

  bool operator==(const SigmaAlgebra& other) const { return atoms_ == other.atoms_; }

 private:
  SigmaAlgebra(SpacePtr space, std::vector<EventSet> atoms);
  SpacePtr space_;
  std::vector<EventSet> atoms_;
  std::vector<std::size_t> atom_of_;
};

/// sigma(generators): outcomes share an atom iff they belong to exactly the
/// same generators. Throws InputError on an invalid generator.
SigmaAlgebra generate_sigma_algebra(const SpacePtr& space, std::span<const EventSet> generators);

/// All 2^atoms unions of atoms, ordered by the atom bitmask. Throws SizeError
/// when 2^atoms exceeds `limit`.
std::vector<EventSet> enumerate_sets(const SigmaAlgebra& sigma, std::size_t limit);

/// True iff `event` is a union of atoms (splits no atom).
bool contains(const SigmaAlgebra& sigma, const EventSet& event);

/// Contains empty set and the space, closed under complement and pairwise union.
bool check_sigma_axioms(const SampleSpace& space, std::span<const EventSet> sets);

bool is_probability(const SampleSpace& space, std::span<const Rational> weights);

class ProbabilityMeasure {
 public:
  /// Throws InputError unless the weights are nonnegative and sum to 1.
  ProbabilityMeasure(SpacePtr space, std::vector<Rational> weights);
  static ProbabilityMeasure uniform(SpacePtr space);

  const SpacePtr& space() const { return space_; }
  const Rational& weight(std::size_t outcome) const { return weights_.at(outcome); }
  const std::vector<Rational>& weights() const { return weights_; }

 private:
  SpacePtr space_;
  std::vector<Rational> weights_;
};

Rational measure_of(const ProbabilityMeasure& mu, const EventSet& event);

}  // namespace mgl
