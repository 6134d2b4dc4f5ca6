#include "mgl/montecarlo.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "mgl/errors.hpp"

namespace mgl {
namespace {

// Runs fill(i) for every i in [0, count), split into contiguous index ranges.
template <typename Fill>
void for_each_path(std::size_t count, std::size_t workers, Fill fill) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fill(i);
    return;
  }
  std::vector<std::jthread> threads;
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    threads.emplace_back([begin, end, &fill] {
      for (std::size_t i = begin; i < end; ++i) fill(i);
    });
  }
}

void require_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw InputError(std::string(name) + " must lie in [0, 1]");
}

std::string format_double(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double total = 0.0;
    for (double v : values) total += v;
    return total;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

EstimateReport estimate(std::span<const double> samples) {
  if (samples.empty()) throw InputError("estimate needs at least one sample");
  EstimateReport report;
  report.n_paths = samples.size();
  const double n = static_cast<double>(samples.size());
  report.mean = pairwise_sum(samples) / n;
  if (samples.size() > 1) {
    std::vector<double> squares(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const double d = samples[i] - report.mean;
      squares[i] = d * d;
    }
    const double variance = pairwise_sum(squares) / (n - 1.0);
    report.std_error = std::sqrt(variance / n);
  }
  report.ci_low = report.mean - 1.96 * report.std_error;
  report.ci_high = report.mean + 1.96 * report.std_error;
  return report;
}

std::mt19937_64 path_generator(std::uint64_t master_seed, std::uint64_t path_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(path_index), static_cast<std::uint32_t>(path_index >> 32)};
  return std::mt19937_64(seq);
}

bool bernoulli(std::mt19937_64& gen, double p) {
  // 53 random bits -> uniform in [0, 1); p = 1 always succeeds, p = 0 never.
  const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
  return u < p;
}

PathEnsemble simulate_walk(std::size_t horizon, double p_heads, std::size_t n_paths, std::uint64_t seed,
                           std::size_t workers) {
  if (horizon < 1) throw InputError("walk horizon must be >= 1");
  if (n_paths < 1) throw InputError("n_paths must be >= 1");
  require_probability(p_heads, "p_heads");

  PathEnsemble ensemble;
  ensemble.model_id = "walk(p=" + format_double(p_heads) + ")";
  ensemble.n_paths = n_paths;
  ensemble.horizon = horizon;
  ensemble.master_seed = seed;
  ensemble.paths.assign(n_paths, std::vector<double>(horizon + 1, 0.0));
  for_each_path(n_paths, workers, [&](std::size_t i) {
    auto gen = path_generator(seed, i);
    auto& path = ensemble.paths[i];
    for (std::size_t n = 1; n <= horizon; ++n) path[n] = path[n - 1] + (bernoulli(gen, p_heads) ? 1.0 : -1.0);
  });
  return ensemble;
}

// ---------------------------------------------------------------------------
// Functionals

StopRule StopRule::parse(std::string_view text) {
  StopRule rule;
  auto colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  const std::string_view arg = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  if (head == "argmax" && colon == std::string_view::npos) {
    rule.kind = Kind::time_of_maximum;
  } else if (head == "above" && !arg.empty()) {
    rule.kind = Kind::first_at_or_above;
    rule.level = parse_rational(arg);
  } else if (head == "below" && !arg.empty()) {
    rule.kind = Kind::first_at_or_below;
    rule.level = parse_rational(arg);
  } else if (head == "time" && !arg.empty()) {
    rule.kind = Kind::fixed_time;
    auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), rule.time);
    if (ec != std::errc{} || ptr != arg.data() + arg.size()) {
      throw InputError("bad stopping time '" + std::string(arg) + "'");
    }
  } else {
    throw InputError("unknown stopping rule '" + std::string(text) + "' (expected above:<l>, below:<l>, time:<n>)");
  }
  return rule;
}

std::string StopRule::describe() const {
  switch (kind) {
    case Kind::first_at_or_above: return "above:" + to_string(level);
    case Kind::first_at_or_below: return "below:" + to_string(level);
    case Kind::fixed_time: return "time:" + std::to_string(time);
    case Kind::time_of_maximum: return "argmax";
  }
  return {};
}

Functional Functional::parse(std::string_view text) {
  Functional f;
  if (text == "terminal") {
    f.kind = Kind::terminal_value;
  } else if (text == "square") {
    f.kind = Kind::terminal_square;
  } else if (text.starts_with("stopped:")) {
    f.kind = Kind::stopped_value;
    f.rule = StopRule::parse(text.substr(8));
  } else if (text.starts_with("upcrossings:")) {
    f.kind = Kind::upcrossings;
    const std::string_view rest = text.substr(12);
    const auto colon = rest.find(':');
    if (colon == std::string_view::npos) throw InputError("upcrossings functional needs upcrossings:<a>:<b>");
    f.a = parse_rational(rest.substr(0, colon));
    f.b = parse_rational(rest.substr(colon + 1));
  } else {
    throw InputError("unknown functional '" + std::string(text) + "'");
  }
  return f;
}

std::string Functional::describe() const {
  switch (kind) {
    case Kind::terminal_value: return "terminal";
    case Kind::terminal_square: return "square";
    case Kind::stopped_value: return "stopped:" + rule.describe();
    case Kind::upcrossings: return "upcrossings:" + to_string(a) + ":" + to_string(b);
  }
  return {};
}

void validate(const Functional& functional) {
  if (functional.kind == Functional::Kind::stopped_value && !functional.rule.prefix_measurable()) {
    throw InputError("stopping rule '" + functional.rule.describe() +
                     "' is not prefix-measurable (it looks at future values) and cannot define a stopping time");
  }
  if (functional.kind == Functional::Kind::upcrossings && !(functional.a < functional.b)) {
    throw InputError("upcrossing interval needs a < b");
  }
}

std::size_t stop_index(const StopRule& rule, std::span<const double> path) {
  if (!rule.prefix_measurable()) {
    throw InputError("stopping rule '" + rule.describe() + "' is not prefix-measurable");
  }
  const std::size_t last = path.size() - 1;
  const double level = to_double(rule.level);
  for (std::size_t n = 0; n <= last; ++n) {
    // Only path[0..n] is consulted when deciding whether to stop at n.
    const double current = path[n];
    switch (rule.kind) {
      case StopRule::Kind::first_at_or_above:
        if (current >= level) return n;
        break;
      case StopRule::Kind::first_at_or_below:
        if (current <= level) return n;
        break;
      case StopRule::Kind::fixed_time:
        if (n == rule.time) return n;
        break;
      case StopRule::Kind::time_of_maximum:
        break;
    }
  }
  return last;
}

double evaluate_functional(const Functional& functional, std::span<const double> path) {
  switch (functional.kind) {
    case Functional::Kind::terminal_value: return path.back();
    case Functional::Kind::terminal_square: return path.back() * path.back();
    case Functional::Kind::stopped_value: return path[stop_index(functional.rule, path)];
    case Functional::Kind::upcrossings:
      return static_cast<double>(count_upcrossings<double>(path, to_double(functional.a), to_double(functional.b)));
  }
  return 0.0;
}

EstimateReport estimate_functional(const PathEnsemble& ensemble, const Functional& functional) {
  validate(functional);
  std::vector<double> samples(ensemble.paths.size());
  for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = evaluate_functional(functional, ensemble.paths[i]);
  return estimate(samples);
}

// ---------------------------------------------------------------------------
// Cross-validation

Rational exact_functional_value(const CoinWalk& walk, const Functional& functional) {
  validate(functional);
  const auto& x = walk.walk;
  const auto& p = walk.model.measure;
  const std::size_t horizon = x.horizon();
  switch (functional.kind) {
    case Functional::Kind::terminal_value: return expectation(x[horizon], p);
    case Functional::Kind::terminal_square: return expectation(x[horizon] * x[horizon], p);
    case Functional::Kind::upcrossings: return expected_upcrossings(x, p, functional.a, functional.b);
    case Functional::Kind::stopped_value: {
      const StopRule& rule = functional.rule;
      StoppingTime tau = [&] {
        switch (rule.kind) {
          case StopRule::Kind::first_at_or_above:
            return hitting_time(x, [&](const Rational& v) { return v >= rule.level; }, true);
          case StopRule::Kind::first_at_or_below:
            return hitting_time(x, [&](const Rational& v) { return v <= rule.level; }, true);
          default:
            return StoppingTime(x.filtration(),
                                std::vector<StopValue>(x.space()->size(), std::min(rule.time, horizon)));
        }
      }();
      return expectation(stopped_value(x, tau), p);
    }
  }
  return Rational(0);
}

double z_score(double observed_mean, double expected, double std_error) {
  const double diff = observed_mean - expected;
  if (std_error == 0.0) {
    return std::fabs(diff) <= 1e-12 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
  }
  return diff / std_error;
}

CrossValidation cross_validate(const WalkModel& model, const Functional& functional, const MonteCarloParams& mc,
                               double z_threshold) {
  validate(functional);
  const CoinWalk walk = make_coin_walk(model.horizon, model.p_heads);
  CrossValidation result;
  result.exact = exact_functional_value(walk, functional);
  const PathEnsemble ensemble = simulate_walk(model.horizon, to_double(model.p_heads), mc.n_paths, mc.seed, mc.workers);
  result.monte_carlo = estimate_functional(ensemble, functional);
  result.z = z_score(result.monte_carlo.mean, to_double(result.exact), result.monte_carlo.std_error);
  result.passed = std::fabs(result.z) <= z_threshold;
  return result;
}

// ---------------------------------------------------------------------------
// Doubling strategy

std::size_t DoublingParams::horizon() const { return exit == DoublingExit::rebound ? n_levels : max_steps; }

DoublingEpisode::DoublingEpisode(const DoublingParams& params) : params_(params), price_(params.entry_price) {}

void DoublingEpisode::step(bool up) {
  if (done_) return;
  ++steps_;
  const std::int64_t move = up ? 1 : -1;
  profit_ += holdings_ * move;
  price_ += move;
  const std::int64_t depth = params_.entry_price - price_;

  if (params_.exit == DoublingExit::rebound && up) {
    done_ = true;
    won_ = true;
  } else if (params_.exit == DoublingExit::return_to_entry && depth <= 0) {
    done_ = true;
    won_ = true;
  } else if (depth >= static_cast<std::int64_t>(params_.n_levels)) {
    done_ = true;
  } else if (depth > static_cast<std::int64_t>(deepest_)) {
    deepest_ = static_cast<std::size_t>(depth);
    holdings_ = std::int64_t{1} << deepest_;
  }
  if (!done_ && params_.exit == DoublingExit::return_to_entry && steps_ >= params_.max_steps) done_ = true;
}

namespace {

void validate_doubling(const DoublingParams& params) {
  if (params.n_levels < 1 || params.n_levels > 60) throw InputError("doubling levels must lie in [1, 60]");
  if (params.exit == DoublingExit::return_to_entry && params.max_steps < 1) {
    throw InputError("return-to-entry exit needs max_steps >= 1");
  }
}

}  // namespace

DoublingSimulation simulate_doubling_strategy(const DoublingParams& params, double p_up, std::size_t n_paths,
                                              std::uint64_t seed, std::size_t workers) {
  validate_doubling(params);
  require_probability(p_up, "p_up");
  if (n_paths < 1) throw InputError("n_paths must be >= 1");
  const std::size_t horizon = params.horizon();

  DoublingSimulation sim;
  const std::string id = "doubling(levels=" + std::to_string(params.n_levels) + ",p=" + format_double(p_up) + ")";
  for (PathEnsemble* e : {&sim.prices, &sim.wealth}) {
    e->model_id = id;
    e->n_paths = n_paths;
    e->horizon = horizon;
    e->master_seed = seed;
    e->paths.assign(n_paths, std::vector<double>(horizon + 1, 0.0));
  }
  sim.prices.model_id += ":price";
  sim.wealth.model_id += ":wealth";

  std::vector<double> profits(n_paths), wins(n_paths);
  for_each_path(n_paths, workers, [&](std::size_t i) {
    auto gen = path_generator(seed, i);
    DoublingEpisode episode(params);
    auto& price = sim.prices.paths[i];
    auto& wealth = sim.wealth.paths[i];
    price[0] = static_cast<double>(params.entry_price);
    for (std::size_t n = 1; n <= horizon; ++n) {
      const bool up = bernoulli(gen, p_up);
      price[n] = price[n - 1] + (up ? 1.0 : -1.0);
      episode.step(up);
      wealth[n] = static_cast<double>(episode.profit());
    }
    profits[i] = static_cast<double>(episode.profit());
    wins[i] = episode.won() ? 1.0 : 0.0;
  });
  sim.profit = estimate(profits);
  sim.win_frequency = estimate(wins);
  return sim;
}

DoublingExact doubling_exact(const DoublingParams& params, const Rational& p_up) {
  validate_doubling(params);
  const std::size_t horizon = params.horizon();
  const CoinModel model = make_coin_tree(horizon, p_up);

  auto replay = [&](std::size_t outcome, std::size_t moves) {
    DoublingEpisode episode(params);
    for (std::size_t k = 1; k <= moves; ++k) episode.step(model.heads(outcome, k));
    return episode;
  };

  // The price keeps moving after the episode closes; the position is 0 then.
  const AdaptedProcess price = make_process(model.filtration, [&](std::size_t i, std::size_t n) {
    long level = static_cast<long>(params.entry_price);
    for (std::size_t k = 1; k <= n; ++k) level += model.heads(i, k) ? 1 : -1;
    return Rational(level);
  });
  const PredictableSequence position = make_predictable(model.filtration, [&](std::size_t i, std::size_t n) {
    return Rational(static_cast<long>(replay(i, n - 1).position()));
  });
  const AdaptedProcess wealth = transform(position, price);

  DoublingExact result;
  result.outcomes = model.space->size();
  result.expected_profit = expectation(wealth[horizon], model.measure);
  for (std::size_t i = 0; i < result.outcomes; ++i) {
    if (replay(i, horizon).won()) result.win_probability += model.measure.weight(i);
  }
  result.price_label = classify(price, model.measure).label;
  result.wealth_label = classify(wealth, model.measure).label;
  return result;
}

void write_paths_csv(std::ostream& out, const PathEnsemble& ensemble) {
  for (std::size_t n = 0; n <= ensemble.horizon; ++n) out << (n ? "," : "") << 't' << n;
  out << '\n';
  const auto old_precision = out.precision(17);
  for (const auto& path : ensemble.paths) {
    for (std::size_t n = 0; n < path.size(); ++n) out << (n ? "," : "") << path[n];
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace mgl
