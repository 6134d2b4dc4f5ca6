#include "mgl/measure_core.hpp"

#include <algorithm>
#include <iterator>
#include <map>
#include <set>
#include <unordered_set>

#include "mgl/errors.hpp"

namespace mgl {

SampleSpace::SampleSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) throw InputError("sample space must contain at least one outcome");
  std::unordered_set<std::string> seen;
  for (const auto& label : labels_) {
    if (!seen.insert(label).second) throw InputError("duplicate outcome label '" + label + "'");
  }
}

std::shared_ptr<const SampleSpace> SampleSpace::indexed(std::size_t size) {
  std::vector<std::string> labels;
  labels.reserve(size);
  for (std::size_t i = 0; i < size; ++i) labels.push_back(std::to_string(i));
  return std::make_shared<const SampleSpace>(std::move(labels));
}

SpacePtr make_space(std::vector<std::string> labels) {
  return std::make_shared<const SampleSpace>(std::move(labels));
}

bool same_space(const SpacePtr& a, const SpacePtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}

void require_same_space(const SpacePtr& a, const SpacePtr& b, const char* context) {
  if (!same_space(a, b)) throw InputError(std::string(context) + ": arguments live on different sample spaces");
}

// ---------------------------------------------------------------------------
// EventSet

EventSet EventSet::of(std::vector<std::size_t> indices, std::size_t space_size) {
  std::sort(indices.begin(), indices.end());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= space_size) {
      throw InputError("outcome index " + std::to_string(indices[i]) + " out of range for space of size " +
                       std::to_string(space_size));
    }
    if (i > 0 && indices[i] == indices[i - 1]) {
      throw InputError("duplicate outcome index " + std::to_string(indices[i]) + " in event");
    }
  }
  return EventSet(std::move(indices));
}

EventSet EventSet::full(std::size_t space_size) {
  std::vector<std::size_t> all(space_size);
  for (std::size_t i = 0; i < space_size; ++i) all[i] = i;
  return EventSet(std::move(all));
}

bool EventSet::contains(std::size_t index) const {
  return std::binary_search(members_.begin(), members_.end(), index);
}

bool EventSet::is_subset_of(const EventSet& other) const {
  return std::includes(other.members_.begin(), other.members_.end(), members_.begin(), members_.end());
}

EventSet EventSet::unite(const EventSet& other) const {
  std::vector<std::size_t> out;
  std::set_union(members_.begin(), members_.end(), other.members_.begin(), other.members_.end(),
                 std::back_inserter(out));
  return EventSet(std::move(out));
}

EventSet EventSet::intersect(const EventSet& other) const {
  std::vector<std::size_t> out;
  std::set_intersection(members_.begin(), members_.end(), other.members_.begin(), other.members_.end(),
                        std::back_inserter(out));
  return EventSet(std::move(out));
}

EventSet EventSet::complement(std::size_t space_size) const {
  std::vector<std::size_t> out;
  out.reserve(space_size - std::min(space_size, members_.size()));
  auto it = members_.begin();
  for (std::size_t i = 0; i < space_size; ++i) {
    if (it != members_.end() && *it == i) {
      ++it;
    } else {
      out.push_back(i);
    }
  }
  return EventSet(std::move(out));
}

// ---------------------------------------------------------------------------
// SigmaAlgebra

SigmaAlgebra::SigmaAlgebra(SpacePtr space, std::vector<EventSet> atoms)
    : space_(std::move(space)), atoms_(std::move(atoms)), atom_of_(space_->size()) {
  std::sort(atoms_.begin(), atoms_.end(),
            [](const EventSet& a, const EventSet& b) { return a.members().front() < b.members().front(); });
  for (std::size_t a = 0; a < atoms_.size(); ++a) {
    for (std::size_t outcome : atoms_[a].members()) atom_of_[outcome] = a;
  }
}

SigmaAlgebra SigmaAlgebra::from_partition(SpacePtr space, std::vector<EventSet> atoms) {
  if (!space) throw InputError("sigma-algebra requires a sample space");
  const std::size_t n = space->size();
  std::vector<bool> covered(n, false);
  for (const auto& atom : atoms) {
    if (atom.empty()) throw InputError("partition contains an empty atom");
    for (std::size_t outcome : atom.members()) {
      if (outcome >= n) throw InputError("atom index " + std::to_string(outcome) + " out of range");
      if (covered[outcome]) {
        throw InputError("atoms overlap at outcome " + std::to_string(outcome));
      }
      covered[outcome] = true;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!covered[i]) throw InputError("atoms do not cover outcome " + std::to_string(i));
  }
  return SigmaAlgebra(std::move(space), std::move(atoms));
}

SigmaAlgebra SigmaAlgebra::trivial(SpacePtr space) {
  const std::size_t n = space->size();
  return SigmaAlgebra(std::move(space), {EventSet::full(n)});
}

SigmaAlgebra SigmaAlgebra::discrete(SpacePtr space) {
  std::vector<EventSet> atoms;
  atoms.reserve(space->size());
  for (std::size_t i = 0; i < space->size(); ++i) atoms.push_back(EventSet::of({i}, space->size()));
  return SigmaAlgebra(std::move(space), std::move(atoms));
}

bool SigmaAlgebra::refines(const SigmaAlgebra& coarser) const {
  if (!same_space(space_, coarser.space_)) return false;
  for (const auto& atom : atoms_) {
    const std::size_t home = coarser.atom_of(atom.members().front());
    for (std::size_t outcome : atom.members()) {
      if (coarser.atom_of(outcome) != home) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Operations

SigmaAlgebra generate_sigma_algebra(const SpacePtr& space, std::span<const EventSet> generators) {
  const std::size_t n = space->size();
  for (const auto& g : generators) {
    for (std::size_t outcome : g.members()) {
      if (outcome >= n) {
        throw InputError("generator index " + std::to_string(outcome) + " out of range for space of size " +
                         std::to_string(n));
      }
    }
  }

  std::vector<std::vector<bool>> signature(n, std::vector<bool>(generators.size(), false));
  for (std::size_t g = 0; g < generators.size(); ++g) {
    for (std::size_t outcome : generators[g].members()) signature[outcome][g] = true;
  }

  std::map<std::vector<bool>, std::size_t> atom_index;
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t outcome = 0; outcome < n; ++outcome) {
    auto [it, inserted] = atom_index.try_emplace(signature[outcome], groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(outcome);
  }

  std::vector<EventSet> atoms;
  atoms.reserve(groups.size());
  for (auto& group : groups) atoms.push_back(EventSet::of(std::move(group), n));
  return SigmaAlgebra::from_partition(space, std::move(atoms));
}

std::vector<EventSet> enumerate_sets(const SigmaAlgebra& sigma, std::size_t limit) {
  const std::size_t k = sigma.atom_count();
  if (k >= 63 || (std::size_t{1} << k) > limit) {
    throw SizeError("sigma-algebra has " + std::to_string(k) + " atoms; 2^" + std::to_string(k) +
                    " sets exceed the enumeration limit " + std::to_string(limit) +
                    " (use the membership test instead)");
  }
  const std::size_t n = sigma.space()->size();
  std::vector<EventSet> out;
  out.reserve(std::size_t{1} << k);
  for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
    std::vector<std::size_t> members;
    for (std::size_t a = 0; a < k; ++a) {
      if (mask & (std::size_t{1} << a)) {
        const auto& atom = sigma.atoms()[a].members();
        members.insert(members.end(), atom.begin(), atom.end());
      }
    }
    out.push_back(EventSet::of(std::move(members), n));
  }
  return out;
}

bool contains(const SigmaAlgebra& sigma, const EventSet& event) {
  const std::size_t n = sigma.space()->size();
  if (!event.empty() && event.members().back() >= n) {
    throw InputError("event index out of range for the sigma-algebra's space");
  }
  std::vector<std::size_t> hits(sigma.atom_count(), 0);
  for (std::size_t outcome : event.members()) ++hits[sigma.atom_of(outcome)];
  for (std::size_t a = 0; a < hits.size(); ++a) {
    if (hits[a] != 0 && hits[a] != sigma.atoms()[a].size()) return false;
  }
  return true;
}

bool check_sigma_axioms(const SampleSpace& space, std::span<const EventSet> sets) {
  const std::size_t n = space.size();
  const std::set<EventSet> collection(sets.begin(), sets.end());
  if (!collection.contains(EventSet{}) || !collection.contains(EventSet::full(n))) return false;
  for (const auto& b : collection) {
    if (!collection.contains(b.complement(n))) return false;
  }
  for (auto b = collection.begin(); b != collection.end(); ++b) {
    for (auto d = std::next(b); d != collection.end(); ++d) {
      if (!collection.contains(b->unite(*d))) return false;
    }
  }
  return true;
}

bool is_probability(const SampleSpace& space, std::span<const Rational> weights) {
  if (weights.size() != space.size()) return false;
  Rational total(0);
  for (const auto& w : weights) {
    if (w < 0) return false;
    total += w;
  }
  return total == 1;
}

ProbabilityMeasure::ProbabilityMeasure(SpacePtr space, std::vector<Rational> weights)
    : space_(std::move(space)), weights_(std::move(weights)) {
  if (!space_) throw InputError("probability measure requires a sample space");
  if (weights_.size() != space_->size()) {
    throw InputError("expected " + std::to_string(space_->size()) + " weights, got " +
                     std::to_string(weights_.size()));
  }
  if (!is_probability(*space_, weights_)) {
    Rational total(0);
    for (const auto& w : weights_) total += w;
    throw InputError("weights must be nonnegative and sum to 1 (sum is " + to_string(total) + ")");
  }
}

ProbabilityMeasure ProbabilityMeasure::uniform(SpacePtr space) {
  const std::size_t n = space->size();
  return ProbabilityMeasure(std::move(space), std::vector<Rational>(n, Rational(1, n)));
}

Rational measure_of(const ProbabilityMeasure& mu, const EventSet& event) {
  Rational total(0);
  for (std::size_t outcome : event.members()) total += mu.weight(outcome);
  return total;
}

}  // namespace mgl
