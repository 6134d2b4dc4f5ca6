#pragma once

// JSON formats: the space descriptor, random variables and the process spec.
// Values are "p/q" or decimal strings (exact) or JSON numbers (integers are
// exact, other numbers mark the variable inexact). Schema violations throw
// InputError whose message starts with the offending field path.

#include <optional>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mgl/integration.hpp"
#include "mgl/measure_core.hpp"
#include "mgl/processes.hpp"

namespace mgl::io {

using Json = nlohmann::ordered_json;

struct SpaceDescriptor {
  SpacePtr space;
  ProbabilityMeasure measure;
  std::vector<EventSet> generators;
};

/// {"outcomes": [...], "weights": [...], "generators": [[0], [1]]}.
/// Missing weights mean the uniform measure; weights not summing to 1 are rejected.
SpaceDescriptor parse_space_descriptor(const Json& doc);

struct TailBoundParams {
  std::size_t window = 1;
  Rational epsilon;
};

struct ProcessSpec {
  SpacePtr space;
  ProbabilityMeasure measure;
  FiltrationPtr filtration;
  std::optional<AdaptedProcess> process;
  std::optional<StoppingTime> stopping_time;
  std::optional<PredictableSequence> predictable;
  std::optional<Rational> bound;
  std::optional<std::pair<Rational, Rational>> interval;
  std::vector<std::pair<Rational, Rational>> grid;
  std::optional<RandomVariable> variable;
  std::optional<SigmaAlgebra> coarse;
  std::optional<SigmaAlgebra> fine;
  std::optional<RandomVariable> candidate;
  std::optional<TailBoundParams> tail_bound;
};

ProcessSpec parse_process_spec(const Json& doc);
Json to_json(const ProcessSpec& spec);

Json to_json(const Rational& value);
Json to_json(const EventSet& event);
Json to_json(const RandomVariable& x);
Json to_json(const SigmaAlgebra& sigma);  // list of atoms
Json to_json(std::span<const StopValue> tau);

/// Reads one value; `exact` is cleared for non-integer JSON numbers.
Rational parse_value(const Json& node, const std::string& path, bool& exact);
RandomVariable parse_random_variable(const Json& node, const SpacePtr& space, const std::string& path);
SigmaAlgebra parse_partition(const Json& node, const SpacePtr& space, const std::string& path);

}  // namespace mgl::io
