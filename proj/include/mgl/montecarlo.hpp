#pragma once

// Seeded path-ensemble simulation, pathwise functionals, cross-validation
// against the exact engine, and the doubling-down betting strategy.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mgl/processes.hpp"
#include "mgl/rational.hpp"

namespace mgl {

struct PathEnsemble {
  std::string model_id;
  std::size_t n_paths = 0;
  std::size_t horizon = 0;
  std::uint64_t master_seed = 0;
  std::vector<std::vector<double>> paths;  // n_paths rows of horizon + 1 values

  bool operator==(const PathEnsemble&) const = default;
};

struct EstimateReport {
  double mean = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;   // mean - 1.96 std_error
  double ci_high = 0.0;  // mean + 1.96 std_error
  std::size_t n_paths = 0;
};

/// Sample mean, standard error (sample std / sqrt(n)) and 95% interval.
/// Sums are pairwise so the result does not depend on how samples were produced.
EstimateReport estimate(std::span<const double> samples);

double pairwise_sum(std::span<const double> values);

/// The generator for one path, a pure function of (master seed, path index).
std::mt19937_64 path_generator(std::uint64_t master_seed, std::uint64_t path_index);

/// True with probability p, from one 53-bit uniform draw.
bool bernoulli(std::mt19937_64& gen, double p);

/// Throws InputError unless horizon >= 1, n_paths >= 1 and p in [0, 1].
/// `workers` splits path indices across threads; output does not depend on it.
PathEnsemble simulate_walk(std::size_t horizon, double p_heads, std::size_t n_paths, std::uint64_t seed,
                           std::size_t workers = 1);

// ---------------------------------------------------------------------------
// Pathwise functionals

/// A stopping rule evaluated on path prefixes. `time_of_maximum` needs the
/// whole path and is rejected wherever a stopping rule is required.
struct StopRule {
  enum class Kind { first_at_or_above, first_at_or_below, fixed_time, time_of_maximum };
  Kind kind = Kind::fixed_time;
  Rational level;
  std::size_t time = 0;

  bool prefix_measurable() const { return kind != Kind::time_of_maximum; }

  /// "above:<level>", "below:<level>", "time:<n>" or "argmax".
  static StopRule parse(std::string_view text);
  std::string describe() const;
};

struct Functional {
  enum class Kind { terminal_value, terminal_square, stopped_value, upcrossings };
  Kind kind = Kind::terminal_value;
  StopRule rule;  // stopped_value
  Rational a, b;  // upcrossings

  /// "terminal", "square", "stopped:<rule>" or "upcrossings:<a>:<b>".
  static Functional parse(std::string_view text);
  std::string describe() const;
};

/// Throws InputError for a non-prefix-measurable stopping rule or a >= b.
void validate(const Functional& functional);

/// Stopping index of `rule` on `path`; paths that never trigger stop at the end.
std::size_t stop_index(const StopRule& rule, std::span<const double> path);

double evaluate_functional(const Functional& functional, std::span<const double> path);

EstimateReport estimate_functional(const PathEnsemble& ensemble, const Functional& functional);

// ---------------------------------------------------------------------------
// Cross-validation

struct WalkModel {
  std::size_t horizon = 0;
  Rational p_heads;
};

struct MonteCarloParams {
  std::size_t n_paths = 100000;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

/// |z| threshold for agreement between the engines.
inline constexpr double kCrossValidationZ = 4.0;

struct CrossValidation {
  Rational exact;
  EstimateReport monte_carlo;
  double z = 0.0;
  bool passed = false;
};

/// Exact expectation of the functional over the coin-walk tree against a
/// Monte Carlo estimate. A zero standard error demands an exact match.
/// Throws SizeError when the walk is too long to enumerate (reduce N).
CrossValidation cross_validate(const WalkModel& model, const Functional& functional, const MonteCarloParams& mc,
                               double z_threshold = kCrossValidationZ);

/// Exact E[functional] on the coin walk.
Rational exact_functional_value(const CoinWalk& walk, const Functional& functional);

double z_score(double observed_mean, double expected, double std_error);

// ---------------------------------------------------------------------------
// Doubling-down strategy
//
// Start holding one share at the entry price; the price moves +-1 per step.
// Each new low at entry-k (k < levels) adds 2^(k-1) shares, so 2^k are held.
// Reaching entry-levels liquidates the position (budget exhausted). Under
// `rebound` the first up-move closes the episode, recovering all losses plus
// one; under `return_to_entry` the episode closes once the price is back at
// or above the entry, or after `max_steps` (marked to market, not a win).

enum class DoublingExit { rebound, return_to_entry };

struct DoublingParams {
  std::int64_t entry_price = 10;
  std::size_t n_levels = 1;
  DoublingExit exit = DoublingExit::rebound;
  std::size_t max_steps = 0;  // return_to_entry only

  /// Number of steps after which every episode has closed.
  std::size_t horizon() const;
};

/// Shares held over each step, as a function of the moves seen so far.
class DoublingEpisode {
 public:
  explicit DoublingEpisode(const DoublingParams& params);

  bool done() const { return done_; }
  bool won() const { return won_; }
  /// Shares held over the next step; 0 once the episode is over.
  std::int64_t position() const { return done_ ? 0 : holdings_; }
  std::int64_t profit() const { return profit_; }
  std::size_t steps() const { return steps_; }
  std::int64_t price() const { return price_; }

  /// Applies one price move. No-op once done.
  void step(bool up);

 private:
  DoublingParams params_;
  std::int64_t price_;
  std::int64_t holdings_ = 1;
  std::size_t deepest_ = 0;
  std::int64_t profit_ = 0;
  std::size_t steps_ = 0;
  bool done_ = false;
  bool won_ = false;
};

struct DoublingSimulation {
  PathEnsemble prices;
  PathEnsemble wealth;  // cumulative profit, held constant after the episode closes
  EstimateReport profit;
  EstimateReport win_frequency;
};

/// Throws InputError on invalid parameters (levels < 1 or > 60, p outside
/// [0, 1], return_to_entry without max_steps, n_paths < 1).
DoublingSimulation simulate_doubling_strategy(const DoublingParams& params, double p_up, std::size_t n_paths,
                                              std::uint64_t seed, std::size_t workers = 1);

struct DoublingExact {
  Rational expected_profit;
  Rational win_probability;
  MartingaleLabel price_label = MartingaleLabel::none;
  MartingaleLabel wealth_label = MartingaleLabel::none;
  std::size_t outcomes = 0;
};

/// Enumerates all 2^horizon move sequences, rebuilds the wealth process as
/// the transform of the price by the doubling positions and classifies it.
DoublingExact doubling_exact(const DoublingParams& params, const Rational& p_up);

/// One row per path, columns t0..tN.
void write_paths_csv(std::ostream& out, const PathEnsemble& ensemble);

}  // namespace mgl
