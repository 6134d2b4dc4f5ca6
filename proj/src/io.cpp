#include "mgl/io.hpp"

#include "mgl/errors.hpp"

namespace mgl::io {
namespace {

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw InputError("field '" + path + "': " + message);
}

const Json& require(const Json& doc, const char* key) {
  if (!doc.is_object()) fail("$", "expected a JSON object");
  auto it = doc.find(key);
  if (it == doc.end()) fail(key, "missing required field");
  return *it;
}

const Json* optional_field(const Json& doc, const char* key) {
  auto it = doc.find(key);
  return it == doc.end() || it->is_null() ? nullptr : &*it;
}

const Json& require_array(const Json& node, const std::string& path) {
  if (!node.is_array()) fail(path, "expected an array");
  return node;
}

std::size_t parse_index(const Json& node, const std::string& path) {
  if (!node.is_number_integer() || node.get<long long>() < 0) fail(path, "expected a nonnegative integer");
  return node.get<std::size_t>();
}

// Rethrows InputError from deeper layers with the field path prepended.
template <typename F>
auto at_path(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const InputError& e) {
    const std::string what = e.what();
    if (what.rfind("field '", 0) == 0) throw;
    fail(path, what);
  }
}

SpacePtr parse_outcomes(const Json& doc) {
  const Json& node = require_array(require(doc, "outcomes"), "outcomes");
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < node.size(); ++i) {
    if (!node[i].is_string()) fail("outcomes[" + std::to_string(i) + "]", "expected a string label");
    labels.push_back(node[i].get<std::string>());
  }
  return at_path("outcomes", [&] { return make_space(std::move(labels)); });
}

ProbabilityMeasure parse_weights(const Json& doc, const SpacePtr& space) {
  const Json* node = optional_field(doc, "weights");
  if (!node) return ProbabilityMeasure::uniform(space);
  require_array(*node, "weights");
  if (node->size() != space->size()) {
    fail("weights", "expected " + std::to_string(space->size()) + " entries, got " + std::to_string(node->size()));
  }
  std::vector<Rational> weights;
  bool exact = true;
  for (std::size_t i = 0; i < node->size(); ++i) weights.push_back(parse_value((*node)[i], "weights[" + std::to_string(i) + "]", exact));
  return at_path("weights", [&] { return ProbabilityMeasure(space, std::move(weights)); });
}

EventSet parse_event(const Json& node, std::size_t space_size, const std::string& path) {
  require_array(node, path);
  std::vector<std::size_t> indices;
  for (std::size_t i = 0; i < node.size(); ++i) indices.push_back(parse_index(node[i], path + "[" + std::to_string(i) + "]"));
  return at_path(path, [&] { return EventSet::of(std::move(indices), space_size); });
}

}  // namespace

Rational parse_value(const Json& node, const std::string& path, bool& exact) {
  if (node.is_string()) return at_path(path, [&] { return parse_rational(node.get<std::string>()); });
  if (node.is_number_integer()) {
    return node.is_number_unsigned() ? Rational(mpz_class(std::to_string(node.get<unsigned long long>())))
                                     : Rational(mpz_class(std::to_string(node.get<long long>())));
  }
  if (node.is_number_float()) {
    exact = false;
    return at_path(path, [&] { return from_double(node.get<double>()); });
  }
  fail(path, "expected a number or a rational string");
}

RandomVariable parse_random_variable(const Json& node, const SpacePtr& space, const std::string& path) {
  require_array(node, path);
  if (node.size() != space->size()) {
    fail(path, "expected " + std::to_string(space->size()) + " values, got " + std::to_string(node.size()));
  }
  std::vector<Rational> values;
  bool exact = true;
  for (std::size_t i = 0; i < node.size(); ++i) values.push_back(parse_value(node[i], path + "[" + std::to_string(i) + "]", exact));
  return RandomVariable(space, std::move(values), exact);
}

SigmaAlgebra parse_partition(const Json& node, const SpacePtr& space, const std::string& path) {
  require_array(node, path);
  std::vector<EventSet> atoms;
  for (std::size_t i = 0; i < node.size(); ++i) {
    atoms.push_back(parse_event(node[i], space->size(), path + "[" + std::to_string(i) + "]"));
  }
  return at_path(path, [&] { return SigmaAlgebra::from_partition(space, std::move(atoms)); });
}

SpaceDescriptor parse_space_descriptor(const Json& doc) {
  if (!doc.is_object()) fail("$", "expected a JSON object");
  SpacePtr space = parse_outcomes(doc);
  ProbabilityMeasure measure = parse_weights(doc, space);
  std::vector<EventSet> generators;
  if (const Json* node = optional_field(doc, "generators")) {
    require_array(*node, "generators");
    for (std::size_t i = 0; i < node->size(); ++i) {
      generators.push_back(parse_event((*node)[i], space->size(), "generators[" + std::to_string(i) + "]"));
    }
  }
  return {std::move(space), std::move(measure), std::move(generators)};
}

ProcessSpec parse_process_spec(const Json& doc) {
  if (!doc.is_object()) fail("$", "expected a JSON object");
  SpacePtr space = parse_outcomes(doc);
  ProbabilityMeasure measure = parse_weights(doc, space);
  ProcessSpec spec{space, std::move(measure), nullptr, {}, {}, {}, {}, {}, {}, {}, {}, {}, {}, {}};

  if (const Json* node = optional_field(doc, "filtration")) {
    require_array(*node, "filtration");
    if (node->empty()) fail("filtration", "needs at least one stage");
    std::vector<SigmaAlgebra> stages;
    for (std::size_t n = 0; n < node->size(); ++n) {
      stages.push_back(parse_partition((*node)[n], space, "filtration[" + std::to_string(n) + "]"));
    }
    spec.filtration = at_path("filtration", [&] { return make_filtration(space, std::move(stages)); });
  }

  auto need_filtration = [&](const char* key) {
    if (!spec.filtration) fail(key, "requires a 'filtration'");
  };

  if (const Json* node = optional_field(doc, "process")) {
    need_filtration("process");
    require_array(*node, "process");
    std::vector<RandomVariable> values;
    for (std::size_t n = 0; n < node->size(); ++n) {
      values.push_back(parse_random_variable((*node)[n], space, "process[" + std::to_string(n) + "]"));
    }
    spec.process = at_path("process", [&] { return AdaptedProcess(spec.filtration, std::move(values)); });
  }

  if (const Json* node = optional_field(doc, "stopping_time")) {
    need_filtration("stopping_time");
    require_array(*node, "stopping_time");
    std::vector<StopValue> tau;
    for (std::size_t i = 0; i < node->size(); ++i) {
      const Json& t = (*node)[i];
      tau.push_back(t.is_null() ? kNever : StopValue(parse_index(t, "stopping_time[" + std::to_string(i) + "]")));
    }
    spec.stopping_time = at_path("stopping_time", [&] { return StoppingTime(spec.filtration, std::move(tau)); });
  }

  if (const Json* node = optional_field(doc, "predictable")) {
    need_filtration("predictable");
    require_array(*node, "predictable");
    std::vector<RandomVariable> values;
    for (std::size_t n = 0; n < node->size(); ++n) {
      values.push_back(parse_random_variable((*node)[n], space, "predictable[" + std::to_string(n) + "]"));
    }
    spec.predictable = at_path("predictable", [&] { return PredictableSequence(spec.filtration, std::move(values)); });
  }

  bool exact = true;
  if (const Json* node = optional_field(doc, "bound")) spec.bound = parse_value(*node, "bound", exact);

  auto parse_pair = [&](const Json& node, const std::string& path) {
    require_array(node, path);
    if (node.size() != 2) fail(path, "expected [a, b]");
    Rational a = parse_value(node[0], path + "[0]", exact);
    Rational b = parse_value(node[1], path + "[1]", exact);
    if (!(a < b)) fail(path, "needs a < b");
    return std::pair<Rational, Rational>{std::move(a), std::move(b)};
  };
  if (const Json* node = optional_field(doc, "interval")) spec.interval = parse_pair(*node, "interval");
  if (const Json* node = optional_field(doc, "grid")) {
    require_array(*node, "grid");
    for (std::size_t i = 0; i < node->size(); ++i) spec.grid.push_back(parse_pair((*node)[i], "grid[" + std::to_string(i) + "]"));
  }

  if (const Json* node = optional_field(doc, "variable")) spec.variable = parse_random_variable(*node, space, "variable");
  if (const Json* node = optional_field(doc, "candidate")) {
    spec.candidate = parse_random_variable(*node, space, "candidate");
  }
  if (const Json* node = optional_field(doc, "coarse")) spec.coarse = parse_partition(*node, space, "coarse");
  if (const Json* node = optional_field(doc, "fine")) spec.fine = parse_partition(*node, space, "fine");

  if (const Json* node = optional_field(doc, "tail_bound")) {
    if (!node->is_object()) fail("tail_bound", "expected an object");
    TailBoundParams params;
    if (const Json* w = optional_field(*node, "window")) params.window = parse_index(*w, "tail_bound.window");
    if (params.window < 1) fail("tail_bound.window", "must be >= 1");
    auto eps = node->find("epsilon");
    if (eps == node->end()) fail("tail_bound.epsilon", "missing required field");
    params.epsilon = parse_value(*eps, "tail_bound.epsilon", exact);
    if (params.epsilon <= 0 || params.epsilon > 1) fail("tail_bound.epsilon", "must lie in (0, 1]");
    spec.tail_bound = params;
  }
  return spec;
}

Json to_json(const Rational& value) { return to_string(value); }

Json to_json(const EventSet& event) { return Json(event.members()); }

Json to_json(const RandomVariable& x) {
  Json out = Json::array();
  for (const auto& v : x.values()) out.push_back(to_string(v));
  return out;
}

Json to_json(const SigmaAlgebra& sigma) {
  Json out = Json::array();
  for (const auto& atom : sigma.atoms()) out.push_back(to_json(atom));
  return out;
}

Json to_json(std::span<const StopValue> tau) {
  Json out = Json::array();
  for (const auto& t : tau) out.push_back(t ? Json(*t) : Json(nullptr));
  return out;
}

Json to_json(const ProcessSpec& spec) {
  Json doc;
  doc["outcomes"] = spec.space->labels();
  Json weights = Json::array();
  for (const auto& w : spec.measure.weights()) weights.push_back(to_string(w));
  doc["weights"] = std::move(weights);
  if (spec.filtration) {
    Json stages = Json::array();
    for (const auto& stage : spec.filtration->stages()) stages.push_back(to_json(stage));
    doc["filtration"] = std::move(stages);
  }
  if (spec.process) {
    Json values = Json::array();
    for (const auto& x : spec.process->values()) values.push_back(to_json(x));
    doc["process"] = std::move(values);
  }
  if (spec.stopping_time) doc["stopping_time"] = to_json(std::span<const StopValue>(spec.stopping_time->values()));
  if (spec.predictable) {
    Json values = Json::array();
    for (const auto& c : spec.predictable->values()) values.push_back(to_json(c));
    doc["predictable"] = std::move(values);
  }
  if (spec.bound) doc["bound"] = to_json(*spec.bound);
  if (spec.interval) doc["interval"] = Json::array({to_json(spec.interval->first), to_json(spec.interval->second)});
  if (!spec.grid.empty()) {
    Json grid = Json::array();
    for (const auto& [a, b] : spec.grid) grid.push_back(Json::array({to_json(a), to_json(b)}));
    doc["grid"] = std::move(grid);
  }
  if (spec.variable) doc["variable"] = to_json(*spec.variable);
  if (spec.candidate) doc["candidate"] = to_json(*spec.candidate);
  if (spec.coarse) doc["coarse"] = to_json(*spec.coarse);
  if (spec.fine) doc["fine"] = to_json(*spec.fine);
  if (spec.tail_bound) {
    doc["tail_bound"] = {{"window", spec.tail_bound->window}, {"epsilon", to_json(spec.tail_bound->epsilon)}};
  }
  return doc;
}

}  // namespace mgl::io
