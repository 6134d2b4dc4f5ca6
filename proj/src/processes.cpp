#include "mgl/processes.hpp"

#include <algorithm>

#include "mgl/conditioning.hpp"

namespace mgl {
namespace {

bool same_filtration(const FiltrationPtr& a, const FiltrationPtr& b) { return a == b || (a && b && *a == *b); }

void require_same_filtration(const FiltrationPtr& a, const FiltrationPtr& b, const char* context) {
  if (!same_filtration(a, b)) throw InputError(std::string(context) + ": arguments use different filtrations");
}

// First atom of `sigma` on which x is not constant, if any.
std::optional<std::size_t> first_split_atom(const RandomVariable& x, const SigmaAlgebra& sigma) {
  for (std::size_t a = 0; a < sigma.atom_count(); ++a) {
    const auto& members = sigma.atoms()[a].members();
    const Rational& first = x[members.front()];
    for (std::size_t outcome : members) {
      if (x[outcome] != first) return a;
    }
  }
  return std::nullopt;
}

Rational expectation_of(const std::function<Rational(std::size_t)>& f, const ProbabilityMeasure& p) {
  Rational total(0);
  for (std::size_t i = 0; i < p.weights().size(); ++i) {
    if (p.weight(i) != 0) total += p.weight(i) * f(i);
  }
  return total;
}

}  // namespace

// ---------------------------------------------------------------------------
// Structures

Filtration::Filtration(SpacePtr space, std::vector<SigmaAlgebra> stages)
    : space_(std::move(space)), stages_(std::move(stages)) {
  if (!space_) throw InputError("filtration requires a sample space");
  if (stages_.empty()) throw InputError("filtration needs at least one stage");
  for (std::size_t n = 0; n < stages_.size(); ++n) {
    if (!same_space(space_, stages_[n].space())) {
      throw InputError("filtration stage " + std::to_string(n) + " lives on a different space");
    }
    if (n > 0 && !stages_[n].refines(stages_[n - 1])) {
      throw InputError("filtration stage " + std::to_string(n) + " does not refine stage " + std::to_string(n - 1));
    }
  }
}

FiltrationPtr make_filtration(SpacePtr space, std::vector<SigmaAlgebra> stages) {
  return std::make_shared<const Filtration>(std::move(space), std::move(stages));
}

AdaptedProcess::AdaptedProcess(FiltrationPtr filtration, std::vector<RandomVariable> values)
    : filtration_(std::move(filtration)), values_(std::move(values)) {
  if (!filtration_) throw InputError("process requires a filtration");
  if (values_.size() != filtration_->stages().size()) {
    throw InputError("process has " + std::to_string(values_.size()) + " values for a filtration with " +
                     std::to_string(filtration_->stages().size()) + " stages");
  }
  for (std::size_t n = 0; n < values_.size(); ++n) {
    require_same_space(values_[n].space(), filtration_->space(), "adapted process");
    if (auto atom = first_split_atom(values_[n], filtration_->stage(n))) {
      throw InputError("process is not adapted: X_" + std::to_string(n) + " varies on atom " +
                       std::to_string(*atom) + " of stage " + std::to_string(n));
    }
  }
}

bool AdaptedProcess::exact() const {
  return std::all_of(values_.begin(), values_.end(), [](const RandomVariable& x) { return x.exact(); });
}

std::vector<Rational> AdaptedProcess::path(std::size_t outcome) const {
  std::vector<Rational> out;
  out.reserve(values_.size());
  for (const auto& x : values_) out.push_back(x.at(outcome));
  return out;
}

AdaptedProcess make_process(FiltrationPtr filtration,
                            const std::function<Rational(std::size_t outcome, std::size_t n)>& value) {
  const auto& space = filtration->space();
  std::vector<RandomVariable> values;
  for (std::size_t n = 0; n <= filtration->horizon(); ++n) {
    std::vector<Rational> xs(space->size());
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = value(i, n);
    values.emplace_back(space, std::move(xs));
  }
  return AdaptedProcess(std::move(filtration), std::move(values));
}

PredictableSequence::PredictableSequence(FiltrationPtr filtration, std::vector<RandomVariable> values)
    : filtration_(std::move(filtration)), values_(std::move(values)) {
  if (!filtration_) throw InputError("predictable sequence requires a filtration");
  if (values_.size() != filtration_->horizon()) {
    throw InputError("predictable sequence needs " + std::to_string(filtration_->horizon()) + " entries C_1..C_N, got " +
                     std::to_string(values_.size()));
  }
  for (std::size_t k = 0; k < values_.size(); ++k) {
    require_same_space(values_[k].space(), filtration_->space(), "predictable sequence");
    if (auto atom = first_split_atom(values_[k], filtration_->stage(k))) {
      throw InputError("sequence is not predictable: C_" + std::to_string(k + 1) + " varies on atom " +
                       std::to_string(*atom) + " of stage " + std::to_string(k));
    }
  }
}

PredictableSequence make_predictable(FiltrationPtr filtration,
                                     const std::function<Rational(std::size_t outcome, std::size_t n)>& value) {
  const auto& space = filtration->space();
  std::vector<RandomVariable> values;
  for (std::size_t n = 1; n <= filtration->horizon(); ++n) {
    std::vector<Rational> cs(space->size());
    for (std::size_t i = 0; i < cs.size(); ++i) cs[i] = value(i, n);
    values.emplace_back(space, std::move(cs));
  }
  return PredictableSequence(std::move(filtration), std::move(values));
}

bool is_stopping_time(std::span<const StopValue> tau, const Filtration& filtration) {
  const std::size_t horizon = filtration.horizon();
  if (tau.size() != filtration.space()->size()) return false;
  for (const auto& t : tau) {
    if (t && *t > horizon) return false;
  }
  for (std::size_t n = 0; n <= horizon; ++n) {
    const auto& stage = filtration.stage(n);
    for (const auto& atom : stage.atoms()) {
      const auto& members = atom.members();
      const bool first = tau[members.front()] && *tau[members.front()] <= n;
      for (std::size_t outcome : members) {
        const bool stopped = tau[outcome] && *tau[outcome] <= n;
        if (stopped != first) return false;
      }
    }
  }
  return true;
}

StoppingTime::StoppingTime(FiltrationPtr filtration, std::vector<StopValue> tau)
    : filtration_(std::move(filtration)), tau_(std::move(tau)) {
  if (!filtration_) throw InputError("stopping time requires a filtration");
  if (tau_.size() != filtration_->space()->size()) {
    throw InputError("stopping time has " + std::to_string(tau_.size()) + " values for a space of size " +
                     std::to_string(filtration_->space()->size()));
  }
  for (const auto& t : tau_) {
    if (t && *t > filtration_->horizon()) {
      throw InputError("stopping time value " + std::to_string(*t) + " exceeds the horizon " +
                       std::to_string(filtration_->horizon()));
    }
  }
  if (!is_stopping_time(tau_, *filtration_)) {
    throw InputError("not a stopping time: some event {tau <= n} is not in stage n");
  }
}

std::size_t StoppingTime::capped(std::size_t outcome, std::size_t n) const {
  const auto& t = tau_.at(outcome);
  return t ? std::min(*t, n) : n;
}

StoppingTime hitting_time(const AdaptedProcess& x, const std::function<bool(const Rational&)>& hit,
                          bool censor_at_horizon) {
  const std::size_t size = x.space()->size();
  std::vector<StopValue> tau(size, kNever);
  for (std::size_t i = 0; i < size; ++i) {
    for (std::size_t n = 0; n <= x.horizon(); ++n) {
      if (hit(x[n][i])) {
        tau[i] = n;
        break;
      }
    }
    if (!tau[i] && censor_at_horizon) tau[i] = x.horizon();
  }
  return StoppingTime(x.filtration(), std::move(tau));
}

// ---------------------------------------------------------------------------
// Classification

std::string_view to_string(MartingaleLabel label) {
  switch (label) {
    case MartingaleLabel::martingale: return "martingale";
    case MartingaleLabel::supermartingale: return "supermartingale";
    case MartingaleLabel::submartingale: return "submartingale";
    case MartingaleLabel::strict_supermartingale: return "strict-supermartingale";
    case MartingaleLabel::strict_submartingale: return "strict-submartingale";
    case MartingaleLabel::none: return "none";
  }
  return "none";
}

bool is_supermartingale(MartingaleLabel label) {
  return label == MartingaleLabel::martingale || label == MartingaleLabel::supermartingale ||
         label == MartingaleLabel::strict_supermartingale;
}

bool is_submartingale(MartingaleLabel label) {
  return label == MartingaleLabel::martingale || label == MartingaleLabel::submartingale ||
         label == MartingaleLabel::strict_submartingale;
}

RandomVariable one_step_drift(const AdaptedProcess& x, const ProbabilityMeasure& p, std::size_t n) {
  if (n >= x.horizon()) throw InputError("one-step drift needs n < horizon");
  return conditional_expectation(x[n + 1], x.filtration()->stage(n), p).result - x[n];
}

MartingaleClassification classify(const AdaptedProcess& x, const ProbabilityMeasure& p, double tolerance) {
  require_same_space(x.space(), p.space(), "classify");
  const auto cmp = Comparison::for_inputs(x.exact(), tolerance);

  std::optional<ClassificationWitness> first_strict;
  std::optional<ClassificationWitness> first_conflict;
  bool any_zero = false;
  bool any_up = false;
  bool any_down = false;

  for (std::size_t n = 0; n < x.horizon(); ++n) {
    const auto& stage = x.filtration()->stage(n);
    const RandomVariable drift = one_step_drift(x, p, n);
    for (std::size_t a = 0; a < stage.atom_count(); ++a) {
      const auto& atom = stage.atoms()[a];
      if (measure_of(p, atom) == 0) continue;
      const Rational& d = drift[atom.members().front()];
      const int sign = cmp.sign_of_difference(d, Rational(0));
      if (sign == 0) {
        any_zero = true;
        continue;
      }
      (sign > 0 ? any_up : any_down) = true;
      ClassificationWitness w{n, a, atom, d};
      if (!first_strict) {
        first_strict = w;
      } else if (!first_conflict && sgn(first_strict->drift) != sign) {
        first_conflict = w;
      }
    }
  }

  MartingaleClassification result;
  if (!any_up && !any_down) {
    result.label = MartingaleLabel::martingale;
  } else if (any_up && any_down) {
    result.label = MartingaleLabel::none;
    result.witness = first_conflict;
  } else if (any_down) {
    result.label = any_zero ? MartingaleLabel::supermartingale : MartingaleLabel::strict_supermartingale;
    result.witness = first_strict;
  } else {
    result.label = any_zero ? MartingaleLabel::submartingale : MartingaleLabel::strict_submartingale;
    result.witness = first_strict;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Transforms and stopping

AdaptedProcess transform(const PredictableSequence& c, const AdaptedProcess& x) {
  require_same_filtration(c.filtration(), x.filtration(), "transform");
  const auto& space = x.space();
  std::vector<RandomVariable> ys;
  ys.reserve(x.horizon() + 1);
  bool exact = x.exact();
  for (const auto& cn : c.values()) exact = exact && cn.exact();

  std::vector<Rational> running(space->size(), Rational(0));
  ys.emplace_back(space, running, exact);
  for (std::size_t n = 1; n <= x.horizon(); ++n) {
    const RandomVariable& cn = c.at(n);
    for (std::size_t i = 0; i < running.size(); ++i) running[i] += cn[i] * (x[n][i] - x[n - 1][i]);
    ys.emplace_back(space, running, exact);
  }
  return AdaptedProcess(x.filtration(), std::move(ys));
}

TransformReport verify_transform_preservation(const PredictableSequence& c, const AdaptedProcess& x,
                                              const ProbabilityMeasure& p, const Rational& bound,
                                              double tolerance) {
  require_same_filtration(c.filtration(), x.filtration(), "verify_transform_preservation");
  TransformReport report;
  report.input_label = classify(x, p, tolerance).label;

  Rational c_min(0), c_max_abs(0);
  bool first = true;
  for (const auto& cn : c.values()) {
    for (const auto& v : cn.values()) {
      if (first || v < c_min) c_min = v;
      if (abs(v) > c_max_abs) c_max_abs = abs(v);
      first = false;
    }
  }

  const bool martingale_case = report.input_label == MartingaleLabel::martingale;
  const bool supermartingale_case = !martingale_case && is_supermartingale(report.input_label);
  if (martingale_case) {
    report.hypothesis_holds = c_max_abs <= bound;
    report.hypothesis = report.hypothesis_holds
                            ? "martingale input with |C| <= " + to_string(bound)
                            : "martingale input but max |C| = " + to_string(c_max_abs) + " exceeds bound " +
                                  to_string(bound);
  } else if (supermartingale_case) {
    report.hypothesis_holds = c_min >= 0 && c_max_abs <= bound;
    report.hypothesis = report.hypothesis_holds ? "supermartingale input with 0 <= C <= " + to_string(bound)
                                                : "supermartingale input needs 0 <= C <= " + to_string(bound) +
                                                      "; C ranges over [" + to_string(c_min) + ", " +
                                                      to_string(c_max_abs) + "] in magnitude";
  } else {
    report.hypothesis_holds = false;
    report.hypothesis = "input is " + std::string(to_string(report.input_label)) +
                        "; preservation covers martingales and supermartingales only";
  }

  const AdaptedProcess y = transform(c, x);
  report.output_label = classify(y, p, tolerance).label;
  report.preserved = martingale_case ? report.output_label == MartingaleLabel::martingale
                                     : is_supermartingale(report.output_label);

  report.drift_identity_holds = true;
  for (std::size_t n = 1; n <= x.horizon(); ++n) {
    const auto& stage = x.filtration()->stage(n - 1);
    const RandomVariable lhs = conditional_expectation(y[n] - y[n - 1], stage, p, tolerance).result;
    const RandomVariable rhs = c.at(n) * conditional_expectation(x[n] - x[n - 1], stage, p, tolerance).result;
    if (!almost_surely_equal(lhs, rhs, p, tolerance)) {
      report.drift_identity_holds = false;
      break;
    }
  }
  return report;
}

AdaptedProcess stopped_process(const AdaptedProcess& x, const StoppingTime& tau) {
  require_same_filtration(x.filtration(), tau.filtration(), "stopped_process");
  return make_process(x.filtration(), [&](std::size_t i, std::size_t n) { return x[tau.capped(i, n)][i]; });
}

PredictableSequence stopping_indicator(const StoppingTime& tau) {
  return make_predictable(tau.filtration(), [&](std::size_t i, std::size_t n) {
    const auto& t = tau[i];
    return Rational(!t || n <= *t ? 1 : 0);
  });
}

RandomVariable stopped_value(const AdaptedProcess& x, const StoppingTime& tau) {
  require_same_filtration(x.filtration(), tau.filtration(), "stopped_value");
  std::vector<Rational> values(x.space()->size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = x[tau.capped(i, x.horizon())][i];
  return RandomVariable(x.space(), std::move(values), x.exact());
}

StoppedProcessReport stopped_process_check(const AdaptedProcess& x, const StoppingTime& tau,
                                           const ProbabilityMeasure& p, double tolerance) {
  StoppedProcessReport report;
  report.input_label = classify(x, p, tolerance).label;
  report.hypothesis_holds = is_supermartingale(report.input_label);

  const AdaptedProcess stopped = stopped_process(x, tau);
  report.stopped_label = classify(stopped, p, tolerance).label;
  report.preserved = report.input_label == MartingaleLabel::martingale
                         ? report.stopped_label == MartingaleLabel::martingale
                         : is_supermartingale(report.stopped_label);

  const AdaptedProcess via_transform = transform(stopping_indicator(tau), x);
  report.transform_identity_holds = true;
  for (std::size_t n = 0; n <= x.horizon(); ++n) {
    if (!pointwise_equal(stopped[n], x[0] + via_transform[n], tolerance)) {
      report.transform_identity_holds = false;
      break;
    }
  }

  const auto cmp = Comparison::for_inputs(x.exact(), tolerance);
  report.expected_initial = expectation(x[0], p);
  report.expectations_hold = true;
  for (std::size_t n = 0; n <= x.horizon(); ++n) {
    report.expected_stopped.push_back(expectation(stopped[n], p));
    const Rational& current = report.expected_stopped.back();
    if (report.input_label == MartingaleLabel::martingale) {
      report.expectations_hold = report.expectations_hold && cmp.equal(current, report.expected_initial);
    } else if (n > 0) {
      report.expectations_hold = report.expectations_hold && cmp.less_equal(current, report.expected_stopped[n - 1]);
    }
  }
  return report;
}

OptionalStoppingReport optional_stopping_report(const AdaptedProcess& x, const StoppingTime& tau,
                                                const ProbabilityMeasure& p, double tolerance) {
  require_same_filtration(x.filtration(), tau.filtration(), "optional_stopping_report");
  OptionalStoppingReport report;
  report.label = classify(x, p, tolerance).label;
  const std::size_t size = x.space()->size();
  const std::size_t horizon = x.horizon();

  bool any_never = false;
  for (std::size_t i = 0; i < size; ++i) {
    if (!tau[i]) {
      any_never = true;
      report.never_probability += p.weight(i);
    }
    for (std::size_t n = 0; n <= horizon; ++n) {
      report.process_bound = std::max(report.process_bound, abs(x[n][i]));
      if (n > 0) report.increment_bound = std::max(report.increment_bound, abs(Rational(x[n][i] - x[n - 1][i])));
    }
  }
  report.expected_time = expectation_of([&](std::size_t i) { return Rational(tau.capped(i, horizon)); }, p);
  report.expected_stopped = expectation(stopped_value(x, tau), p);
  report.expected_initial = expectation(x[0], p);

  // On a finite horizon |X| and its increments are bounded, so conditions
  // (ii) and (iii) reduce to tau being finite almost surely.
  const bool finite_as = report.never_probability == 0;
  report.time_bounded = !any_never;
  report.process_bounded_time_finite = finite_as;
  report.increments_bounded_time_integrable = finite_as;
  const bool some_condition =
      report.time_bounded || report.process_bounded_time_finite || report.increments_bounded_time_integrable;

  const auto cmp = Comparison::for_inputs(x.exact(), tolerance);
  if (report.label == MartingaleLabel::martingale) {
    report.conclusion_holds = cmp.equal(report.expected_stopped, report.expected_initial);
  } else {
    report.conclusion_holds = cmp.less_equal(report.expected_stopped, report.expected_initial);
  }

  std::string note = "condition (ii) is taken as: X bounded and tau finite almost surely";
  if (!finite_as) {
    report.hypothesis_holds = false;
    note = "tau unbounded at horizon; conclusion not asserted; " + note;
  } else if (!is_supermartingale(report.label)) {
    report.hypothesis_holds = false;
    note = "process is " + std::string(to_string(report.label)) + ", not a supermartingale; conclusion not asserted; " +
           note;
  } else {
    report.hypothesis_holds = some_condition;
  }
  report.note = std::move(note);
  return report;
}

TailBoundReport stopping_tail_bound_check(const StoppingTime& tau, const ProbabilityMeasure& p, std::size_t window,
                                          const Rational& epsilon) {
  if (window < 1) throw InputError("tail bound window must be >= 1");
  if (epsilon <= 0 || epsilon > 1) throw InputError("tail bound epsilon must lie in (0, 1]");
  const auto& filtration = *tau.filtration();
  require_same_space(filtration.space(), p.space(), "stopping_tail_bound_check");

  TailBoundReport report;
  report.window = window;
  report.epsilon = epsilon;
  report.horizon = filtration.horizon();
  const std::size_t horizon = report.horizon;
  const std::size_t size = p.weights().size();

  auto stopped_by = [&](std::size_t i, std::size_t t) { return tau[i] && *tau[i] <= t; };

  report.hypothesis_holds = true;
  for (std::size_t n = 0; n + window <= horizon; ++n) {
    const auto& stage = filtration.stage(n);
    std::optional<Rational> lowest;
    for (const auto& atom : stage.atoms()) {
      const Rational mass = measure_of(p, atom);
      if (mass == 0) continue;
      Rational hit(0);
      for (std::size_t i : atom.members()) {
        if (stopped_by(i, n + window)) hit += p.weight(i);
      }
      const Rational conditional = hit / mass;
      if (!lowest || conditional < *lowest) lowest = conditional;
    }
    const Rational value = lowest.value_or(Rational(1));
    if (!(value > epsilon)) report.hypothesis_holds = false;
    report.min_conditional_probability.push_back(value);
  }

  report.bound_holds = true;
  for (std::size_t k = 0; k * window <= horizon; ++k) {
    TailStep step;
    step.k = k;
    for (std::size_t i = 0; i < size; ++i) {
      if (!stopped_by(i, k * window)) step.tail_probability += p.weight(i);
    }
    step.geometric_bound = pow(Rational(1 - epsilon), static_cast<unsigned>(k));
    step.holds = step.tail_probability <= step.geometric_bound;
    report.bound_holds = report.bound_holds && step.holds;
    report.chain.push_back(std::move(step));
  }

  report.truncated_expectation = expectation_of([&](std::size_t i) { return Rational(tau.capped(i, horizon)); }, p);
  report.expectation_bound = Rational(window) / epsilon;
  report.bound_holds = report.bound_holds && report.truncated_expectation <= report.expectation_bound;
  report.note = "horizon-truncated at N = " + std::to_string(horizon) +
                ": E[T] is replaced by E[min(T, N)] and the tail chain stops at k * window <= N";
  if (report.min_conditional_probability.empty()) report.note += "; no n satisfies n + window <= N, hypothesis vacuous";
  return report;
}

// ---------------------------------------------------------------------------
// Upcrossings and L^p quantities

std::vector<Rational> abs_moments(const AdaptedProcess& x, const ProbabilityMeasure& p, unsigned power) {
  std::vector<Rational> out;
  out.reserve(x.horizon() + 1);
  for (const auto& xn : x.values()) {
    out.push_back(expectation_of([&](std::size_t i) { return pow(abs(xn[i]), power); }, p));
  }
  return out;
}

Rational sup_abs_moment(const AdaptedProcess& x, const ProbabilityMeasure& p, unsigned power) {
  const auto moments = abs_moments(x, p, power);
  return *std::max_element(moments.begin(), moments.end());
}

Rational expected_upcrossings(const AdaptedProcess& x, const ProbabilityMeasure& p, const Rational& a,
                              const Rational& b) {
  if (!(a < b)) throw InputError("upcrossing interval needs a < b");
  return expectation_of(
      [&](std::size_t i) {
        const auto path = x.path(i);
        return Rational(static_cast<unsigned long>(count_upcrossings<Rational>(path, a, b)));
      },
      p);
}

UpcrossingReport upcrossing_inequality_check(const AdaptedProcess& x, const ProbabilityMeasure& p, const Rational& a,
                                             const Rational& b, double tolerance) {
  if (!(a < b)) throw InputError("upcrossing interval needs a < b");
  UpcrossingReport report;
  report.label = classify(x, p, tolerance).label;
  report.hypothesis_holds = is_supermartingale(report.label);
  report.a = a;
  report.b = b;
  report.expected_upcrossings = expected_upcrossings(x, p, a, b);
  report.lhs = (b - a) * report.expected_upcrossings;
  const RandomVariable& last = x[x.horizon()];
  report.rhs = expectation_of([&](std::size_t i) { return negative_part(Rational(last[i] - a)); }, p);
  report.corollary_bound = abs(a) + sup_abs_moment(x, p, 1);

  const auto cmp = Comparison::for_inputs(x.exact(), tolerance);
  report.inequality_holds = cmp.less_equal(report.lhs, report.rhs);
  report.corollary_holds = cmp.less_equal(report.lhs, report.corollary_bound);
  return report;
}

PythagorasReport l2_pythagoras_check(const AdaptedProcess& m, const ProbabilityMeasure& p, double tolerance) {
  PythagorasReport report;
  report.label = classify(m, p, tolerance).label;
  report.hypothesis_holds = report.label == MartingaleLabel::martingale;
  const std::size_t horizon = m.horizon();

  std::vector<RandomVariable> increments;
  for (std::size_t k = 1; k <= horizon; ++k) increments.push_back(m[k] - m[k - 1]);

  report.lhs = expectation(m[horizon] * m[horizon], p);
  report.rhs = expectation(m[0] * m[0], p);
  for (const auto& d : increments) report.rhs += expectation(d * d, p);
  report.gap = report.lhs - report.rhs;
  const auto cmp = Comparison::for_inputs(m.exact(), tolerance);
  report.identity_holds = cmp.equal(report.lhs, report.rhs);

  // prefix[i][j] = sum over 1 <= i' <= i, 1 <= j' <= j of E[D_i' D_j'], so the
  // increment product over (s, t] x (u, v] is a four-corner difference.
  std::vector<std::vector<Rational>> prefix(horizon + 1, std::vector<Rational>(horizon + 1, Rational(0)));
  for (std::size_t i = 1; i <= horizon; ++i) {
    for (std::size_t j = 1; j <= horizon; ++j) {
      const Rational gram = expectation(increments[i - 1] * increments[j - 1], p);
      prefix[i][j] = gram + prefix[i - 1][j] + prefix[i][j - 1] - prefix[i - 1][j - 1];
    }
  }

  report.all_orthogonal = true;
  for (std::size_t s = 0; s <= horizon; ++s) {
    for (std::size_t t = s + 1; t <= horizon; ++t) {
      for (std::size_t u = t; u <= horizon; ++u) {
        for (std::size_t v = u + 1; v <= horizon; ++v) {
          Rational product = prefix[t][v] - prefix[s][v] - prefix[t][u] + prefix[s][u];
          ++report.products_checked;
          if (!cmp.equal(product, Rational(0))) {
            report.all_orthogonal = false;
            report.nonzero_products.push_back({s, t, u, v, std::move(product)});
          }
        }
      }
    }
  }
  return report;
}

ConvergenceDiagnostic truncated_convergence_diagnostic(const AdaptedProcess& x, const ProbabilityMeasure& p,
                                                       std::span<const std::pair<Rational, Rational>> grid) {
  ConvergenceDiagnostic report;
  report.label = classify(x, p).label;
  report.hypothesis_holds = is_supermartingale(report.label);
  report.abs_means = abs_moments(x, p, 1);
  report.sup_abs_mean = *std::max_element(report.abs_means.begin(), report.abs_means.end());
  const std::size_t horizon = x.horizon();
  report.abs_mean_growing =
      horizon >= 2 ? report.abs_means[horizon] > report.abs_means[horizon - 2] : false;

  for (const auto& [a, b] : grid) {
    IntervalDiagnostic d;
    d.a = a;
    d.b = b;
    d.expected_upcrossings = expected_upcrossings(x, p, a, b);
    d.bound = (abs(a) + report.sup_abs_mean) / (b - a);
    d.ratio = d.bound == 0 ? 0.0 : to_double(Rational(d.expected_upcrossings / d.bound));
    d.near_bound = d.ratio >= kNearBoundRatio;
    report.intervals.push_back(std::move(d));
  }

  report.note = "finite-horizon diagnostic over N = " + std::to_string(horizon) +
                " steps; bounded upcrossing counts are consistent with, but do not prove, almost-sure convergence";
  if (!report.hypothesis_holds) report.note += "; process is not a supermartingale";
  if (report.abs_mean_growing) report.note += "; E|X_n| is still growing at the horizon, L1-boundedness not evident";
  return report;
}

// ---------------------------------------------------------------------------
// Coin-toss models

CoinModel make_coin_tree(std::size_t horizon, const Rational& p_heads) {
  if (horizon < 1) throw InputError("coin model horizon must be >= 1");
  if (horizon > kMaxCoinHorizon) {
    throw SizeError("coin model horizon " + std::to_string(horizon) + " exceeds the exact enumeration limit of " +
                    std::to_string(kMaxCoinHorizon) + "; use the Monte Carlo engine");
  }
  if (p_heads < 0 || p_heads > 1) throw InputError("p_heads must lie in [0, 1]");

  const std::size_t size = std::size_t{1} << horizon;
  const Rational p_tails = 1 - p_heads;
  std::vector<Rational> heads_pow(horizon + 1), tails_pow(horizon + 1);
  for (std::size_t k = 0; k <= horizon; ++k) {
    heads_pow[k] = pow(p_heads, static_cast<unsigned>(k));
    tails_pow[k] = pow(p_tails, static_cast<unsigned>(k));
  }

  std::vector<std::string> labels(size);
  std::vector<Rational> weights(size);
  for (std::size_t i = 0; i < size; ++i) {
    std::string label(horizon, 'H');
    std::size_t heads = 0;
    for (std::size_t k = 1; k <= horizon; ++k) {
      if ((i >> (horizon - k)) & 1U) {
        label[k - 1] = 'T';
      } else {
        ++heads;
      }
    }
    labels[i] = std::move(label);
    weights[i] = heads_pow[heads] * tails_pow[horizon - heads];
  }
  auto space = make_space(std::move(labels));

  std::vector<SigmaAlgebra> stages;
  for (std::size_t n = 0; n <= horizon; ++n) {
    const std::size_t block = std::size_t{1} << (horizon - n);
    std::vector<EventSet> atoms;
    atoms.reserve(size / block);
    for (std::size_t start = 0; start < size; start += block) {
      std::vector<std::size_t> members(block);
      for (std::size_t j = 0; j < block; ++j) members[j] = start + j;
      atoms.push_back(EventSet::of(std::move(members), size));
    }
    stages.push_back(SigmaAlgebra::from_partition(space, std::move(atoms)));
  }

  ProbabilityMeasure measure(space, std::move(weights));
  auto filtration = make_filtration(space, std::move(stages));
  return CoinModel{horizon, std::move(space), std::move(measure), std::move(filtration)};
}

CoinWalk make_coin_walk(std::size_t horizon, const Rational& p_heads) {
  CoinModel model = make_coin_tree(horizon, p_heads);
  const std::size_t size = model.space->size();
  std::vector<RandomVariable> values;
  std::vector<Rational> position(size, Rational(0));
  values.emplace_back(model.space, position);
  for (std::size_t n = 1; n <= horizon; ++n) {
    for (std::size_t i = 0; i < size; ++i) position[i] += model.heads(i, n) ? 1 : -1;
    values.emplace_back(model.space, position);
  }
  AdaptedProcess walk(model.filtration, std::move(values));
  return CoinWalk{std::move(model), std::move(walk)};
}

}  // namespace mgl
