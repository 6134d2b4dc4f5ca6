#include "mgl/cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "mgl/conditioning.hpp"
#include "mgl/errors.hpp"
#include "mgl/montecarlo.hpp"

namespace mgl::cli {
namespace {

using io::Json;

constexpr const char* kViolationMessage =
    "genuine violation: the checked statement failed although its hypotheses hold; this indicates a bug in this "
    "tool, not in the theorem";

std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", v);
  return buffer;
}

std::string format_scalar(const Json& node) {
  if (node.is_number_float()) return format_double(node.get<double>());
  return node.dump();
}

void write_json(std::string& out, const Json& node, int depth) {
  const std::string pad(static_cast<std::size_t>(depth + 1) * 2, ' ');
  const std::string close_pad(static_cast<std::size_t>(depth) * 2, ' ');
  if (node.is_object()) {
    if (node.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    bool first = true;
    for (const auto& [key, value] : node.items()) {
      if (!first) out += ",\n";
      first = false;
      out += pad + Json(key).dump() + ": ";
      write_json(out, value, depth + 1);
    }
    out += "\n" + close_pad + "}";
  } else if (node.is_array()) {
    if (node.empty()) {
      out += "[]";
      return;
    }
    // Arrays of scalars stay on one line.
    const bool flat = std::none_of(node.begin(), node.end(), [](const Json& e) { return e.is_structured(); });
    if (flat) {
      out += "[";
      for (std::size_t i = 0; i < node.size(); ++i) out += (i ? ", " : "") + format_scalar(node[i]);
      out += "]";
      return;
    }
    out += "[\n";
    for (std::size_t i = 0; i < node.size(); ++i) {
      if (i) out += ",\n";
      out += pad;
      write_json(out, node[i], depth + 1);
    }
    out += "\n" + close_pad + "]";
  } else {
    out += format_scalar(node);
  }
}

void write_human(std::string& out, const Json& node, const std::string& path) {
  if (node.is_object()) {
    for (const auto& [key, value] : node.items()) write_human(out, value, path.empty() ? key : path + "." + key);
  } else if (node.is_array() && std::any_of(node.begin(), node.end(), [](const Json& e) { return e.is_structured(); })) {
    for (std::size_t i = 0; i < node.size(); ++i) write_human(out, node[i], path + "[" + std::to_string(i) + "]");
  } else if (node.is_array()) {
    out += path + ": [";
    for (std::size_t i = 0; i < node.size(); ++i) {
      out += (i ? ", " : "");
      out += node[i].is_string() ? node[i].get<std::string>() : format_scalar(node[i]);
    }
    out += "]\n";
  } else {
    out += path + ": " + (node.is_string() ? node.get<std::string>() : format_scalar(node)) + "\n";
  }
}

Json estimate_json(const EstimateReport& e) {
  return {{"mean", e.mean}, {"std_error", e.std_error}, {"ci95", Json::array({e.ci_low, e.ci_high})},
          {"n_paths", e.n_paths}};
}

Json label_json(MartingaleLabel label) { return std::string(to_string(label)); }

std::string theorem_field_error(const char* field, std::string_view theorem) {
  return "field '" + std::string(field) + "': required by theorem '" + std::string(theorem) + "'";
}

template <typename T>
const T& need(const std::optional<T>& value, const char* field, std::string_view theorem) {
  if (!value) throw InputError(theorem_field_error(field, theorem));
  return *value;
}

struct Verdict {
  bool hypothesis_holds = true;
  bool holds = true;
  Json hypothesis = Json::object();
  Json values = Json::object();
  std::string note;
};

Verdict verify_classify(const io::ProcessSpec& spec, std::string_view theorem, double tol) {
  const auto& x = need(spec.process, "process", theorem);
  const auto result = classify(x, spec.measure, tol);
  Verdict v;
  v.values["label"] = label_json(result.label);
  v.values["steps_checked"] = x.horizon();
  if (result.witness) {
    const auto& w = *result.witness;
    v.values["witness"] = {{"step", w.step},
                           {"atom_index", w.atom_index},
                           {"atom", io::to_json(w.atom)},
                           {"drift", io::to_json(w.drift)}};
  }
  return v;
}

Verdict verify_transform(const io::ProcessSpec& spec, std::string_view theorem, double tol) {
  const auto& x = need(spec.process, "process", theorem);
  const auto& c = need(spec.predictable, "predictable", theorem);
  Rational bound(0);
  if (spec.bound) {
    bound = *spec.bound;
  } else {
    for (const auto& cn : c.values())
      for (const auto& value : cn.values()) bound = std::max(bound, abs(value));
  }
  const auto r = verify_transform_preservation(c, x, spec.measure, bound, tol);
  Verdict v;
  v.hypothesis_holds = r.hypothesis_holds;
  v.holds = r.theorem_holds();
  v.hypothesis = {{"input_label", label_json(r.input_label)}, {"bound", io::to_json(bound)}, {"case", r.hypothesis}};
  v.values = {{"output_label", label_json(r.output_label)},
              {"preserved", r.preserved},
              {"drift_identity_holds", r.drift_identity_holds}};
  return v;
}

Verdict verify_stopped(const io::ProcessSpec& spec, std::string_view theorem, double tol) {
  const auto& x = need(spec.process, "process", theorem);
  const auto& tau = need(spec.stopping_time, "stopping_time", theorem);
  const auto r = stopped_process_check(x, tau, spec.measure, tol);
  Verdict v;
  v.hypothesis_holds = r.hypothesis_holds;
  v.holds = r.theorem_holds();
  v.hypothesis = {{"input_label", label_json(r.input_label)}, {"supermartingale", r.hypothesis_holds}};
  Json stopped = Json::array();
  for (const auto& e : r.expected_stopped) stopped.push_back(io::to_json(e));
  v.values = {{"stopped_label", label_json(r.stopped_label)},
              {"preserved", r.preserved},
              {"transform_identity_holds", r.transform_identity_holds},
              {"expected_initial", io::to_json(r.expected_initial)},
              {"expected_stopped", std::move(stopped)},
              {"expectations_hold", r.expectations_hold}};
  return v;
}

Verdict verify_optional_stopping(const io::ProcessSpec& spec, std::string_view theorem, double tol) {
  const auto& x = need(spec.process, "process", theorem);
  const auto& tau = need(spec.stopping_time, "stopping_time", theorem);
  const auto r = optional_stopping_report(x, tau, spec.measure, tol);
  Verdict v;
  v.hypothesis_holds = r.hypothesis_holds;
  v.holds = r.theorem_holds();
  v.hypothesis = {{"label", label_json(r.label)},
                  {"time_bounded", r.time_bounded},
                  {"process_bounded_time_finite", r.process_bounded_time_finite},
                  {"increments_bounded_time_integrable", r.increments_bounded_time_integrable},
                  {"process_bound", io::to_json(r.process_bound)},
                  {"increment_bound", io::to_json(r.increment_bound)},
                  {"never_probability", io::to_json(r.never_probability)}};
  v.values = {{"expected_stopped", io::to_json(r.expected_stopped)},
              {"expected_initial", io::to_json(r.expected_initial)},
              {"expected_time", io::to_json(r.expected_time)},
              {"conclusion_holds", r.conclusion_holds}};
  v.note = r.note;
  return v;
}

Verdict verify_upcrossing(const io::ProcessSpec& spec, std::string_view theorem, double tol) {
  const auto& x = need(spec.process, "process", theorem);
  const auto& [a, b] = need(spec.interval, "interval", theorem);
  const auto r = upcrossing_inequality_check(x, spec.measure, a, b, tol);
  Verdict v;
  v.hypothesis_holds = r.hypothesis_holds;
  v.holds = r.theorem_holds();
  v.hypothesis = {{"label", label_json(r.label)}, {"supermartingale", r.hypothesis_holds}};
  v.values = {{"a", io::to_json(r.a)},
              {"b", io::to_json(r.b)},
              {"expected_upcrossings", io::to_json(r.expected_upcrossings)},
              {"lhs", io::to_json(r.lhs)},
              {"rhs", io::to_json(r.rhs)},
              {"inequality_holds", r.inequality_holds},
              {"corollary_bound", io::to_json(r.corollary_bound)},
              {"corollary_holds", r.corollary_holds}};
  return v;
}

Verdict verify_pythagoras(const io::ProcessSpec& spec, std::string_view theorem, double tol) {
  const auto& m = need(spec.process, "process", theorem);
  const auto r = l2_pythagoras_check(m, spec.measure, tol);
  Verdict v;
  v.hypothesis_holds = r.hypothesis_holds;
  v.holds = r.theorem_holds();
  v.hypothesis = {{"label", label_json(r.label)}, {"martingale", r.hypothesis_holds}};
  Json nonzero = Json::array();
  for (const auto& e : r.nonzero_products) {
    nonzero.push_back({{"s", e.s}, {"t", e.t}, {"u", e.u}, {"v", e.v}, {"product", io::to_json(e.product)}});
  }
  v.values = {{"lhs", io::to_json(r.lhs)},
              {"rhs", io::to_json(r.rhs)},
              {"gap", io::to_json(r.gap)},
              {"identity_holds", r.identity_holds},
              {"products_checked", r.products_checked},
              {"all_orthogonal", r.all_orthogonal},
              {"nonzero_products", std::move(nonzero)}};
  return v;
}

Verdict verify_tower(const io::ProcessSpec& spec, std::string_view theorem, double tol) {
  const auto& x = need(spec.variable, "variable", theorem);
  const auto& coarse = need(spec.coarse, "coarse", theorem);
  const auto& fine = need(spec.fine, "fine", theorem);
  Verdict v;
  v.hypothesis_holds = fine.refines(coarse);
  v.hypothesis = {{"coarse_within_fine", v.hypothesis_holds}};
  if (!v.hypothesis_holds) {
    try {
      require_sub_sigma_algebra(coarse, fine);
    } catch (const PreconditionError& e) {
      v.note = e.what();
    }
    return v;
  }
  const auto r = tower_check(x, coarse, fine, spec.measure, tol);
  v.holds = r.holds();
  v.values = {{"given_coarse", io::to_json(r.given_coarse)},
              {"fine_then_coarse", io::to_json(r.fine_then_coarse)},
              {"coarse_then_fine", io::to_json(r.coarse_then_fine)},
              {"fine_then_coarse_holds", r.fine_then_coarse_holds},
              {"coarse_then_fine_holds", r.coarse_then_fine_holds}};
  return v;
}

Verdict verify_kolmogorov_identity(const io::ProcessSpec& spec, std::string_view theorem, double tol) {
  const auto& x = need(spec.variable, "variable", theorem);
  const auto& g = need(spec.coarse, "coarse", theorem);
  const auto computed = conditional_expectation(x, g, spec.measure, tol);
  const auto own = verify_kolmogorov(x, g, spec.measure, computed.result, tol);
  Verdict v;
  v.holds = own.holds;
  Json null_atoms = Json::array();
  for (const auto& atom : computed.null_atoms) null_atoms.push_back(io::to_json(atom));
  v.values = {{"conditional_expectation", io::to_json(computed.result)},
              {"null_atoms", std::move(null_atoms)},
              {"identity_holds", own.holds}};
  if (!own.holds) v.note = own.reason;
  if (spec.candidate) {
    const auto verdict = verify_kolmogorov(x, g, spec.measure, *spec.candidate, tol);
    v.hypothesis_holds = verdict.holds;
    v.hypothesis = {{"candidate_is_version", verdict.holds}};
    v.values["candidate"] = io::to_json(*spec.candidate);
    if (!verdict.holds) v.note = "candidate is not a version of E[X|G]: " + verdict.reason;
  }
  return v;
}

Verdict verify_tail_bound(const io::ProcessSpec& spec, std::string_view theorem, double) {
  const auto& tau = need(spec.stopping_time, "stopping_time", theorem);
  const auto& params = need(spec.tail_bound, "tail_bound", theorem);
  const auto r = stopping_tail_bound_check(tau, spec.measure, params.window, params.epsilon);
  Verdict v;
  v.hypothesis_holds = r.hypothesis_holds;
  v.holds = r.theorem_holds();
  Json mins = Json::array();
  for (const auto& m : r.min_conditional_probability) mins.push_back(io::to_json(m));
  v.hypothesis = {{"window", r.window},
                  {"epsilon", io::to_json(r.epsilon)},
                  {"min_conditional_probability", std::move(mins)},
                  {"holds", r.hypothesis_holds}};
  Json chain = Json::array();
  for (const auto& step : r.chain) {
    chain.push_back({{"k", step.k},
                     {"tail_probability", io::to_json(step.tail_probability)},
                     {"geometric_bound", io::to_json(step.geometric_bound)},
                     {"holds", step.holds}});
  }
  v.values = {{"horizon", r.horizon},
              {"chain", std::move(chain)},
              {"truncated_expectation", io::to_json(r.truncated_expectation)},
              {"expectation_bound", io::to_json(r.expectation_bound)},
              {"bound_holds", r.bound_holds}};
  v.note = r.note;
  return v;
}

Verdict verify_convergence(const io::ProcessSpec& spec, std::string_view theorem, double) {
  const auto& x = need(spec.process, "process", theorem);
  if (spec.grid.empty()) throw InputError(theorem_field_error("grid", theorem));
  const auto r = truncated_convergence_diagnostic(x, spec.measure, spec.grid);
  Verdict v;
  v.hypothesis_holds = r.hypothesis_holds;
  v.hypothesis = {{"label", label_json(r.label)}, {"holds", r.hypothesis_holds}};
  Json means = Json::array();
  for (const auto& m : r.abs_means) means.push_back(io::to_json(m));
  Json intervals = Json::array();
  for (const auto& d : r.intervals) {
    intervals.push_back({{"a", io::to_json(d.a)},
                         {"b", io::to_json(d.b)},
                         {"expected_upcrossings", io::to_json(d.expected_upcrossings)},
                         {"bound", io::to_json(d.bound)},
                         {"ratio", d.ratio},
                         {"near_bound", d.near_bound}});
  }
  v.values = {{"abs_means", std::move(means)},
              {"sup_abs_mean", io::to_json(r.sup_abs_mean)},
              {"abs_mean_growing", r.abs_mean_growing},
              {"intervals", std::move(intervals)}};
  v.note = r.note;
  return v;
}

using VerifyFn = Verdict (*)(const io::ProcessSpec&, std::string_view, double);

VerifyFn find_selector(std::string_view theorem) {
  static const std::pair<std::string_view, VerifyFn> table[] = {
      {"classify", verify_classify},
      {"transform", verify_transform},
      {"stopped", verify_stopped},
      {"optional-stopping", verify_optional_stopping},
      {"upcrossing", verify_upcrossing},
      {"pythagoras", verify_pythagoras},
      {"tower", verify_tower},
      {"kolmogorov", verify_kolmogorov_identity},
      {"tail-bound", verify_tail_bound},
      {"convergence", verify_convergence},
  };
  for (const auto& [name, fn] : table)
    if (name == theorem) return fn;
  throw InputError("unknown theorem selector '" + std::string(theorem) + "'");
}

Rational parse_probability(const std::string& text, const char* name) {
  Rational p = parse_rational(text);
  if (p < 0 || p > 1) throw InputError(std::string(name) + " must lie in [0, 1]");
  return p;
}

void require_enumerable(std::size_t outcomes, const RunConfig& config) {
  if (outcomes > config.enumeration_limit) {
    throw SizeError("space of " + std::to_string(outcomes) + " outcomes exceeds the enumeration limit " +
                    std::to_string(config.enumeration_limit));
  }
}

std::size_t coin_outcomes(std::size_t horizon) {
  if (horizon > kMaxCoinHorizon) {
    throw SizeError("horizon " + std::to_string(horizon) + " exceeds the enumeration maximum of " +
                    std::to_string(kMaxCoinHorizon) + "; use simulate for longer walks");
  }
  return std::size_t{1} << horizon;
}

std::size_t resolve_workers(std::size_t requested) {
  if (requested > 0) return requested;
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

// C_n = 2^(length of the losing streak just before step n).
PredictableSequence doubling_bets(const CoinWalk& walk) {
  const CoinModel& model = walk.model;
  return make_predictable(model.filtration, [&](std::size_t i, std::size_t n) {
    std::size_t streak = 0;
    for (std::size_t k = n - 1; k >= 1 && !model.heads(i, k); --k) ++streak;
    return pow(Rational(2), static_cast<unsigned>(streak));
  });
}

std::string read_input(const std::string& path) {
  if (path == "-") return {std::istreambuf_iterator<char>(std::cin), {}};
  std::ifstream in(path);
  if (!in) throw InputError("cannot open input file '" + path + "'");
  return {std::istreambuf_iterator<char>(in), {}};
}

Json parse_document(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InputError(std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

std::size_t resolve_enumeration_limit(std::optional<std::size_t> flag, const char* env_value) {
  if (flag) {
    if (*flag < 1) throw InputError("--limit must be >= 1");
    return *flag;
  }
  if (env_value && *env_value) {
    char* end = nullptr;
    errno = 0;
    const unsigned long long value = std::strtoull(env_value, &end, 10);
    if (errno != 0 || *end != '\0' || value < 1 || env_value[0] == '-') {
      throw InputError(std::string(kEnumerationLimitEnv) + " must be a positive integer, got '" + env_value + "'");
    }
    return static_cast<std::size_t>(value);
  }
  return kDefaultEnumerationLimit;
}

std::string dump_json(const io::Json& doc) {
  std::string out;
  write_json(out, doc, 0);
  out += "\n";
  return out;
}

std::string render_human(const io::Json& doc) {
  std::string out;
  write_human(out, doc, "");
  return out;
}

CommandResult cmd_sigma(const io::Json& doc, const RunConfig& config) {
  const io::SpaceDescriptor desc = io::parse_space_descriptor(doc);
  const SigmaAlgebra sigma = generate_sigma_algebra(desc.space, desc.generators);

  Json report;
  report["command"] = "sigma";
  report["outcomes"] = desc.space->labels();
  report["atom_count"] = sigma.atom_count();
  report["atoms"] = io::to_json(sigma);
  Json atom_labels = Json::array();
  for (const auto& atom : sigma.atoms()) {
    Json names = Json::array();
    for (std::size_t i : atom.members()) names.push_back(desc.space->labels()[i]);
    atom_labels.push_back(std::move(names));
  }
  report["atom_labels"] = std::move(atom_labels);

  const std::size_t atoms = sigma.atom_count();
  const bool within = atoms < 64 && (std::uint64_t{1} << atoms) <= config.enumeration_limit;
  report["set_count"] = atoms < 64 ? Json(std::uint64_t{1} << atoms) : Json(mpz_class(mpz_class(1) << atoms).get_str());
  if (within) {
    const auto sets = enumerate_sets(sigma, config.enumeration_limit);
    Json listed = Json::array();
    for (const auto& s : sets) listed.push_back(io::to_json(s));
    report["sets"] = std::move(listed);
    report["axioms_hold"] = check_sigma_axioms(*desc.space, sets);
  } else {
    report["warning"] = "2^" + std::to_string(atoms) + " sets exceed the enumeration limit " +
                        std::to_string(config.enumeration_limit) + "; listing atoms only";
  }
  return {std::move(report), kExitPass, std::nullopt};
}

CommandResult cmd_verify(const io::Json& doc, std::string_view theorem, const RunConfig& config) {
  const VerifyFn fn = find_selector(theorem);
  const io::ProcessSpec spec = io::parse_process_spec(doc);
  require_enumerable(spec.space->size(), config);
  const Verdict v = fn(spec, theorem, config.tolerance);

  Json report;
  report["command"] = "verify";
  report["theorem"] = std::string(theorem);
  report["hypothesis_holds"] = v.hypothesis_holds;
  report["hypothesis"] = v.hypothesis;
  report["values"] = v.values;
  int code = kExitPass;
  if (!v.hypothesis_holds) {
    code = kExitHypothesisFailure;
    report["verdict"] = "hypothesis-failure";
  } else if (v.holds) {
    report["verdict"] = "pass";
  } else {
    code = kExitViolation;
    report["verdict"] = "violation";
    report["message"] = kViolationMessage;
  }
  if (!v.note.empty()) report["note"] = v.note;
  report["exit_code"] = code;
  return {std::move(report), code, std::nullopt};
}

CommandResult cmd_simulate(const SimulateOptions& options, const RunConfig& config) {
  const std::uint64_t seed = config.seed.value_or(0);
  const std::size_t workers = resolve_workers(options.workers);
  const Rational p = parse_probability(options.p, "--p");
  const double p_double = to_double(p);

  Json report;
  report["command"] = "simulate";
  report["model"] = options.model;
  std::ostringstream csv;

  if (options.model == "walk") {
    const Functional functional = Functional::parse(options.functional);
    validate(functional);
    report["params"] = {{"n", options.horizon},
                        {"p", to_string(p)},
                        {"paths", options.n_paths},
                        {"seed", seed},
                        {"functional", functional.describe()}};
    const PathEnsemble ensemble = simulate_walk(options.horizon, p_double, options.n_paths, seed, workers);
    const EstimateReport est = estimate_functional(ensemble, functional);
    report["estimate"] = estimate_json(est);
    if (options.exact) {
      require_enumerable(coin_outcomes(options.horizon), config);
      const Rational exact = exact_functional_value(make_coin_walk(options.horizon, p), functional);
      const double z = z_score(est.mean, to_double(exact), est.std_error);
      report["exact"] = {{"value", to_string(exact)},
                         {"value_double", to_double(exact)},
                         {"z", z},
                         {"within_z", std::abs(z) <= kCrossValidationZ}};
    }
    write_paths_csv(csv, ensemble);
  } else if (options.model == "doubling") {
    DoublingParams params;
    params.entry_price = options.entry;
    params.n_levels = options.levels;
    params.max_steps = options.max_steps;
    if (options.exit_rule == "rebound") {
      params.exit = DoublingExit::rebound;
    } else if (options.exit_rule == "return") {
      params.exit = DoublingExit::return_to_entry;
    } else {
      throw InputError("unknown exit rule '" + options.exit_rule + "' (expected rebound or return)");
    }
    report["params"] = {{"levels", params.n_levels}, {"entry", params.entry_price}, {"exit", options.exit_rule},
                        {"max_steps", params.max_steps}, {"p", to_string(p)},       {"paths", options.n_paths},
                        {"seed", seed}};
    const DoublingSimulation sim = simulate_doubling_strategy(params, p_double, options.n_paths, seed, workers);
    report["profit"] = estimate_json(sim.profit);
    report["win_frequency"] = estimate_json(sim.win_frequency);
    if (options.exact) {
      require_enumerable(coin_outcomes(params.horizon()), config);
      const DoublingExact exact = doubling_exact(params, p);
      const double profit_z = z_score(sim.profit.mean, to_double(exact.expected_profit), sim.profit.std_error);
      const double win_z =
          z_score(sim.win_frequency.mean, to_double(exact.win_probability), sim.win_frequency.std_error);
      report["exact"] = {{"expected_profit", to_string(exact.expected_profit)},
                         {"win_probability", to_string(exact.win_probability)},
                         {"win_probability_double", to_double(exact.win_probability)},
                         {"price_label", label_json(exact.price_label)},
                         {"wealth_label", label_json(exact.wealth_label)},
                         {"outcomes", exact.outcomes},
                         {"profit_z", profit_z},
                         {"win_z", win_z},
                         {"within_z", std::abs(profit_z) <= kCrossValidationZ &&
                                          std::abs(win_z) <= kCrossValidationZ}};
    }
    write_paths_csv(csv, sim.wealth);
  } else {
    throw InputError("unknown model '" + options.model + "' (expected walk or doubling)");
  }
  return {std::move(report), kExitPass, csv.str()};
}

io::Json walk_spec(const WalkSpecOptions& options) {
  coin_outcomes(options.horizon);
  const Rational p = parse_probability(options.p, "--p");
  const CoinWalk walk = make_coin_walk(options.horizon, p);

  auto check_choice = [](const std::string& value, const char* flag) {
    if (value != "none" && value != "doubling") {
      throw InputError(std::string(flag) + " must be none or doubling, got '" + value + "'");
    }
  };
  check_choice(options.strategy, "--strategy");
  check_choice(options.predictable, "--predictable");

  io::ProcessSpec spec{walk.model.space, walk.model.measure, walk.model.filtration, {}, {}, {}, {}, {}, {}, {}, {}, {}, {}, {}};
  spec.process = options.strategy == "doubling" ? transform(doubling_bets(walk), walk.walk) : walk.walk;
  if (options.predictable == "doubling") {
    spec.predictable = doubling_bets(walk);
    spec.bound = pow(Rational(2), static_cast<unsigned>(options.horizon - 1));
  }
  if (options.stop) {
    const StopRule rule = StopRule::parse(*options.stop);
    if (!rule.prefix_measurable()) throw InputError("stop rule '" + *options.stop + "' is not prefix-measurable");
    switch (rule.kind) {
      case StopRule::Kind::first_at_or_above:
        spec.stopping_time = hitting_time(*spec.process, [&](const Rational& v) { return v >= rule.level; },
                                          options.censor);
        break;
      case StopRule::Kind::first_at_or_below:
        spec.stopping_time = hitting_time(*spec.process, [&](const Rational& v) { return v <= rule.level; },
                                          options.censor);
        break;
      default: {
        if (rule.time > options.horizon) throw InputError("stop time exceeds the horizon");
        spec.stopping_time = StoppingTime(walk.model.filtration, std::vector<StopValue>(walk.model.space->size(), rule.time));
      }
    }
  }
  return io::to_json(spec);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact finite-space martingale toolkit", "mgl"};
  app.require_subcommand(1);

  RunConfig config;
  std::string format = "json";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> limit;
  std::optional<std::string> out_path;
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "human", "csv"}));
  app.add_option("--seed", seed, "Master seed for simulation");
  app.add_option("--tolerance", config.tolerance, "Comparison tolerance for inexact inputs")
      ->check(CLI::PositiveNumber);
  app.add_option("--limit", limit, "Enumeration limit (overrides MGL_ENUM_LIMIT)");
  app.add_option("--out", out_path, "Write the report to this file");

  std::string input;
  CLI::App* sigma = app.add_subcommand("sigma", "Generate a sigma-algebra from a space descriptor");
  sigma->add_option("file", input, "Space descriptor JSON ('-' for stdin)")->required();
  sigma->fallthrough();

  std::string theorem;
  CLI::App* verify = app.add_subcommand("verify", "Check a theorem on a process spec");
  verify->add_option("file", input, "Process spec JSON ('-' for stdin)")->required();
  verify->add_option("--theorem", theorem, "Theorem selector")->required();
  verify->fallthrough();

  SimulateOptions sim;
  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo simulation of a model");
  simulate->add_option("model", sim.model, "walk or doubling")->required();
  simulate->add_option("--n", sim.horizon, "Walk horizon");
  simulate->add_option("--p", sim.p, "Probability of an up-move");
  simulate->add_option("--paths", sim.n_paths, "Number of paths");
  simulate->add_option("--functional", sim.functional, "terminal, square, stopped:<rule> or upcrossings:<a>:<b>");
  simulate->add_option("--levels", sim.levels, "Doubling depth");
  simulate->add_option("--entry", sim.entry, "Doubling entry price");
  simulate->add_option("--exit", sim.exit_rule, "Doubling exit rule: rebound or return");
  simulate->add_option("--max-steps", sim.max_steps, "Step cap for the return exit rule");
  simulate->add_option("--workers", sim.workers, "Worker threads (0: all cores)");
  simulate->add_flag("--exact", sim.exact, "Add the enumerated exact value and z-score");
  simulate->fallthrough();

  WalkSpecOptions ws;
  CLI::App* walk = app.add_subcommand("walk-spec", "Emit a coin-walk process spec");
  walk->add_option("--n", ws.horizon, "Horizon")->required();
  walk->add_option("--p", ws.p, "Probability of heads");
  walk->add_option("--strategy", ws.strategy, "Emitted process: none (the walk) or doubling (its transform)");
  walk->add_option("--predictable", ws.predictable, "Attach a predictable sequence: none or doubling");
  walk->add_option("--stop", ws.stop, "Stopping rule: above:<l>, below:<l> or time:<n>");
  bool never = false;
  walk->add_flag("--never", never, "Paths that never hit get NEVER instead of N");
  walk->fallthrough();

  std::vector<const char*> argv{"mgl"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitPass : kExitInputError;
  }

  try {
    config.output_format = format == "human" ? OutputFormat::human : format == "csv" ? OutputFormat::csv
                                                                                       : OutputFormat::json;
    config.seed = seed;
    config.out_path = out_path;
    config.enumeration_limit = resolve_enumeration_limit(limit, std::getenv(kEnumerationLimitEnv));

    CommandResult result;
    if (sigma->parsed()) {
      config.command = "sigma";
      config.input_path = input;
      result = cmd_sigma(parse_document(read_input(input)), config);
    } else if (verify->parsed()) {
      config.command = "verify";
      config.input_path = input;
      result = cmd_verify(parse_document(read_input(input)), theorem, config);
    } else if (simulate->parsed()) {
      config.command = "simulate";
      result = cmd_simulate(sim, config);
    } else {
      config.command = "walk-spec";
      ws.censor = !never;
      result.report = walk_spec(ws);
    }

    std::string text;
    switch (config.output_format) {
      case OutputFormat::json: text = dump_json(result.report); break;
      case OutputFormat::human: text = render_human(result.report); break;
      case OutputFormat::csv:
        if (!result.csv) throw InputError("csv output is only available for simulate");
        text = *result.csv;
        break;
    }
    if (config.out_path) {
      std::ofstream file(*config.out_path);
      if (!file) throw InputError("cannot open output file '" + *config.out_path + "'");
      file << text;
    } else {
      out << text;
    }
    return result.exit_code;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const SizeError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n" << kViolationMessage << "\n";
    return kExitViolation;
  }
  return kExitInputError;
}

}  // namespace mgl::cli
