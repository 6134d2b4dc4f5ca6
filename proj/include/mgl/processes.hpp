#pragma once

// Discrete-time processes on a finite filtered probability space:
// filtrations, adapted and predictable sequences, martingale classification,
// transforms, stopping times and the finite-horizon theorem checks.

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mgl/errors.hpp"
#include "mgl/integration.hpp"
#include "mgl/measure_core.hpp"

namespace mgl {

/// F_0 within F_1 within ... within F_N. Throws InputError if a stage does not
/// refine its predecessor or lives on another space.
class Filtration {
 public:
  Filtration(SpacePtr space, std::vector<SigmaAlgebra> stages);

  const SpacePtr& space() const { return space_; }
  std::size_t horizon() const { return stages_.size() - 1; }
  const SigmaAlgebra& stage(std::size_t n) const { return stages_.at(n); }
  const std::vector<SigmaAlgebra>& stages() const { return stages_; }

  bool operator==(const Filtration& other) const { return same_space(space_, other.space_) && stages_ == other.stages_; }

 private:
  SpacePtr space_;
  std::vector<SigmaAlgebra> stages_;
};

using FiltrationPtr = std::shared_ptr<const Filtration>;

FiltrationPtr make_filtration(SpacePtr space, std::vector<SigmaAlgebra> stages);

/// X_0..X_N with X_n measurable for stage n.
class AdaptedProcess {
 public:
  /// Throws InputError naming the first (n, atom) where X_n is not
  /// stage-n measurable, or on a length mismatch.
  AdaptedProcess(FiltrationPtr filtration, std::vector<RandomVariable> values);

  const FiltrationPtr& filtration() const { return filtration_; }
  const SpacePtr& space() const { return filtration_->space(); }
  std::size_t horizon() const { return values_.size() - 1; }
  const RandomVariable& operator[](std::size_t n) const { return values_[n]; }
  const RandomVariable& at(std::size_t n) const { return values_.at(n); }
  const std::vector<RandomVariable>& values() const { return values_; }
  bool exact() const;

  /// (X_0(omega), ..., X_N(omega)).
  std::vector<Rational> path(std::size_t outcome) const;

 private:
  FiltrationPtr filtration_;
  std::vector<RandomVariable> values_;
};

/// Builds the process value(outcome, n) for n = 0..N and checks adaptation.
AdaptedProcess make_process(FiltrationPtr filtration,
                            const std::function<Rational(std::size_t outcome, std::size_t n)>& value);

/// C_1..C_N with C_n measurable for stage n-1.
class PredictableSequence {
 public:
  /// `values[k]` holds C_{k+1}. Throws InputError on a predictability
  /// violation or when there are not exactly N entries.
  PredictableSequence(FiltrationPtr filtration, std::vector<RandomVariable> values);

  const FiltrationPtr& filtration() const { return filtration_; }
  std::size_t horizon() const { return values_.size(); }
  /// C_n for 1 <= n <= N.
  const RandomVariable& at(std::size_t n) const { return values_.at(n - 1); }
  const std::vector<RandomVariable>& values() const { return values_; }

 private:
  FiltrationPtr filtration_;
  std::vector<RandomVariable> values_;
};

PredictableSequence make_predictable(FiltrationPtr filtration,
                                     const std::function<Rational(std::size_t outcome, std::size_t n)>& value);

/// A stopping-time value: a time in 0..N, or nullopt for "never within the horizon".
using StopValue = std::optional<std::size_t>;
inline constexpr StopValue kNever = std::nullopt;

/// {tau <= n} is a union of stage-n atoms for every n <= N.
bool is_stopping_time(std::span<const StopValue> tau, const Filtration& filtration);

class StoppingTime {
 public:
  /// Throws InputError if `tau` is not a stopping time or a value exceeds N.
  StoppingTime(FiltrationPtr filtration, std::vector<StopValue> tau);

  const FiltrationPtr& filtration() const { return filtration_; }
  const StopValue& operator[](std::size_t outcome) const { return tau_[outcome]; }
  const std::vector<StopValue>& values() const { return tau_; }
  /// min(tau(omega), n), with NEVER treated as larger than the horizon.
  std::size_t capped(std::size_t outcome, std::size_t n) const;

 private:
  FiltrationPtr filtration_;
  std::vector<StopValue> tau_;
};

/// First n with hit(X_n); outcomes that never hit get NEVER, or N when
/// `censor_at_horizon` is set.
StoppingTime hitting_time(const AdaptedProcess& x, const std::function<bool(const Rational&)>& hit,
                          bool censor_at_horizon);

// ---------------------------------------------------------------------------
// Classification

enum class MartingaleLabel {
  martingale,
  supermartingale,
  submartingale,
  strict_supermartingale,
  strict_submartingale,
  none,
};

std::string_view to_string(MartingaleLabel label);

/// Martingales count as both super- and submartingales.
bool is_supermartingale(MartingaleLabel label);
bool is_submartingale(MartingaleLabel label);

struct ClassificationWitness {
  std::size_t step = 0;  // n, comparing E[X_{n+1} | F_n] with X_n
  std::size_t atom_index = 0;
  EventSet atom;
  Rational drift;  // E[X_{n+1} | F_n] - X_n on the atom
};

struct MartingaleClassification {
  MartingaleLabel label = MartingaleLabel::none;
  std::optional<ClassificationWitness> witness;
};

/// E[X_{n+1} | F_n] - X_n for 0 <= n < N.
RandomVariable one_step_drift(const AdaptedProcess& x, const ProbabilityMeasure& p, std::size_t n);

/// Compares E[X_{n+1} | F_n] with X_n on every positive-probability atom.
/// "strict" labels mean the inequality is strict on every such atom at
/// every step. Witnesses are the first (n, atom) in lexicographic order
/// where the relation is strict (or, for `none`, where the sign disagrees
/// with the first strict one).
MartingaleClassification classify(const AdaptedProcess& x, const ProbabilityMeasure& p, double tolerance = 1e-12);

// ---------------------------------------------------------------------------
// Transforms and stopping

/// Y_0 = 0, Y_n = sum_{k<=n} C_k (X_k - X_{k-1}). Throws InputError when C
/// and X use different filtrations.
AdaptedProcess transform(const PredictableSequence& c, const AdaptedProcess& x);

struct TransformReport {
  MartingaleLabel input_label = MartingaleLabel::none;
  MartingaleLabel output_label = MartingaleLabel::none;
  bool hypothesis_holds = false;
  std::string hypothesis;  // which case applied, or why none did
  /// E[Y_n - Y_{n-1} | F_{n-1}] = C_n E[X_n - X_{n-1} | F_{n-1}] a.s. for all n.
  bool drift_identity_holds = false;
  bool preserved = false;

  bool theorem_holds() const { return !hypothesis_holds || (preserved && drift_identity_holds); }
};

/// Martingale X with |C| <= bound must give a martingale transform;
/// supermartingale X with 0 <= C <= bound must give a supermartingale.
TransformReport verify_transform_preservation(const PredictableSequence& c, const AdaptedProcess& x,
                                              const ProbabilityMeasure& p, const Rational& bound,
                                              double tolerance = 1e-12);

/// X^tau_n = X_{min(tau, n)}. Throws InputError on a filtration mismatch.
AdaptedProcess stopped_process(const AdaptedProcess& x, const StoppingTime& tau);

/// C_n = 1{n <= tau}, the predictable sequence whose transform is X^tau - X_0.
PredictableSequence stopping_indicator(const StoppingTime& tau);

/// X_tau, with NEVER read as the horizon value X_N.
RandomVariable stopped_value(const AdaptedProcess& x, const StoppingTime& tau);

struct StoppedProcessReport {
  MartingaleLabel input_label = MartingaleLabel::none;
  MartingaleLabel stopped_label = MartingaleLabel::none;
  bool hypothesis_holds = false;  // X is a supermartingale (martingales included)
  /// X^tau = X_0 + transform(1{n <= tau}, X) pointwise.
  bool transform_identity_holds = false;
  bool preserved = false;
  std::vector<Rational> expected_stopped;  // E[X_{min(tau, n)}], n = 0..N
  Rational expected_initial;               // E[X_0]
  /// Martingale: every entry equals E[X_0]. Supermartingale: nonincreasing in n.
  bool expectations_hold = false;

  bool theorem_holds() const { return !hypothesis_holds || (preserved && transform_identity_holds && expectations_hold); }
};

StoppedProcessReport stopped_process_check(const AdaptedProcess& x, const StoppingTime& tau,
                                           const ProbabilityMeasure& p, double tolerance = 1e-12);

struct OptionalStoppingReport {
  MartingaleLabel label = MartingaleLabel::none;
  bool time_bounded = false;                    // tau <= N everywhere
  bool process_bounded_time_finite = false;     // |X| bounded and tau finite a.s.
  bool increments_bounded_time_integrable = false;  // |X_n - X_{n-1}| <= k and E[tau] finite
  Rational process_bound;
  Rational increment_bound;
  Rational never_probability;  // P(tau = NEVER)
  Rational expected_time;      // E[min(tau, N)]
  Rational expected_stopped;   // E[X_tau]
  Rational expected_initial;   // E[X_0]
  bool hypothesis_holds = false;
  bool conclusion_holds = false;
  std::string note;

  bool theorem_holds() const { return !hypothesis_holds || conclusion_holds; }
};

OptionalStoppingReport optional_stopping_report(const AdaptedProcess& x, const StoppingTime& tau,
                                                const ProbabilityMeasure& p, double tolerance = 1e-12);

struct TailStep {
  std::size_t k = 0;
  Rational tail_probability;  // P(T > k * window)
  Rational geometric_bound;   // (1 - epsilon)^k
  bool holds = false;
};

struct TailBoundReport {
  std::size_t window = 0;
  Rational epsilon;
  std::size_t horizon = 0;
  /// Smallest P(T <= n + window | F_n) over positive-probability atoms, for
  /// each n with n + window <= horizon.
  std::vector<Rational> min_conditional_probability;
  bool hypothesis_holds = false;
  std::vector<TailStep> chain;
  Rational truncated_expectation;  // E[min(T, horizon)]
  Rational expectation_bound;      // window / epsilon
  bool bound_holds = false;
  std::string note;

  bool theorem_holds() const { return !hypothesis_holds || bound_holds; }
};

/// Throws InputError unless window >= 1 and 0 < epsilon <= 1.
TailBoundReport stopping_tail_bound_check(const StoppingTime& tau, const ProbabilityMeasure& p, std::size_t window,
                                          const Rational& epsilon);

// ---------------------------------------------------------------------------
// Upcrossings and L^p quantities

/// Completed [a, b] upcrossings: a visit to <= a followed later by a visit to
/// >= b. A start at or above b does not count.
template <typename T>
std::size_t count_upcrossings(std::span<const T> path, const T& a, const T& b) {
  if (!(a < b)) throw InputError("upcrossing interval needs a < b");
  std::size_t count = 0;
  bool below = false;
  for (const T& x : path) {
    if (!below) {
      if (x <= a) below = true;
    } else if (x >= b) {
      ++count;
      below = false;
    }
  }
  return count;
}

/// E[|X_n|^p] for n = 0..N.
std::vector<Rational> abs_moments(const AdaptedProcess& x, const ProbabilityMeasure& p, unsigned power);
/// max_n E[|X_n|^p] over the horizon.
Rational sup_abs_moment(const AdaptedProcess& x, const ProbabilityMeasure& p, unsigned power);

/// E[U_N[a, b]] by path enumeration.
Rational expected_upcrossings(const AdaptedProcess& x, const ProbabilityMeasure& p, const Rational& a,
                              const Rational& b);

struct UpcrossingReport {
  MartingaleLabel label = MartingaleLabel::none;
  bool hypothesis_holds = false;
  Rational a, b;
  Rational expected_upcrossings;  // E[U_N[a, b]]
  Rational lhs;                   // (b - a) E[U_N]
  Rational rhs;                   // E[(X_N - a)^-]
  Rational corollary_bound;       // |a| + sup_m E|X_m|
  bool inequality_holds = false;
  bool corollary_holds = false;

  bool theorem_holds() const { return !hypothesis_holds || (inequality_holds && corollary_holds); }
};

UpcrossingReport upcrossing_inequality_check(const AdaptedProcess& x, const ProbabilityMeasure& p, const Rational& a,
                                             const Rational& b, double tolerance = 1e-12);

struct OrthogonalityEntry {
  std::size_t s = 0, t = 0, u = 0, v = 0;
  Rational product;  // E[(M_t - M_s)(M_v - M_u)]
};

struct PythagorasReport {
  MartingaleLabel label = MartingaleLabel::none;
  bool hypothesis_holds = false;
  Rational lhs;  // E[M_N^2]
  Rational rhs;  // E[M_0^2] + sum_k E[(M_k - M_{k-1})^2]
  Rational gap;  // lhs - rhs
  bool identity_holds = false;
  std::size_t products_checked = 0;
  std::vector<OrthogonalityEntry> nonzero_products;
  bool all_orthogonal = false;

  bool theorem_holds() const { return !hypothesis_holds || (identity_holds && all_orthogonal); }
};

/// The L^2 Pythagoras identity and E[(M_t - M_s)(M_v - M_u)] = 0 for all
/// s < t <= u < v.
PythagorasReport l2_pythagoras_check(const AdaptedProcess& m, const ProbabilityMeasure& p, double tolerance = 1e-12);

struct IntervalDiagnostic {
  Rational a, b;
  Rational expected_upcrossings;
  Rational bound;  // (|a| + sup_m E|X_m|) / (b - a)
  double ratio = 0.0;
  bool near_bound = false;
};

struct ConvergenceDiagnostic {
  MartingaleLabel label = MartingaleLabel::none;
  bool hypothesis_holds = false;
  std::vector<Rational> abs_means;  // E|X_n|, n = 0..N
  Rational sup_abs_mean;
  /// E|X_N| > E|X_{N-2}|: L^1 boundedness is not evident at this horizon.
  bool abs_mean_growing = false;
  std::vector<IntervalDiagnostic> intervals;
  std::string note;
};

/// Ratio of observed upcrossings to the bound at or above which an interval
/// is flagged.
inline constexpr double kNearBoundRatio = 0.9;

ConvergenceDiagnostic truncated_convergence_diagnostic(const AdaptedProcess& x, const ProbabilityMeasure& p,
                                                       std::span<const std::pair<Rational, Rational>> grid);

// ---------------------------------------------------------------------------
// Coin-toss models

inline constexpr std::size_t kMaxCoinHorizon = 20;

/// All 2^N flip sequences in lexicographic order with H before T (outcome
/// bit N-k clear means flip k is heads), the product measure and the
/// filtration of prefix classes.
struct CoinModel {
  std::size_t horizon = 0;
  SpacePtr space;
  ProbabilityMeasure measure;
  FiltrationPtr filtration;

  /// Flip k (1-based) of `outcome` is heads.
  bool heads(std::size_t outcome, std::size_t k) const { return ((outcome >> (horizon - k)) & 1U) == 0; }
};

/// Throws SizeError when N > kMaxCoinHorizon (use the Monte Carlo engine),
/// InputError when N < 1 or p is outside [0, 1].
CoinModel make_coin_tree(std::size_t horizon, const Rational& p_heads);

struct CoinWalk {
  CoinModel model;
  AdaptedProcess walk;  // X_n = sum_{k<=n} (+1 heads, -1 tails)
};

CoinWalk make_coin_walk(std::size_t horizon, const Rational& p_heads);

}  // namespace mgl
