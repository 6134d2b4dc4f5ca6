#include "mgl/processes.hpp"

#include <gtest/gtest.h>

#include "mgl/conditioning.hpp"
#include "support/oracles.hpp"

namespace {

using mgl::AdaptedProcess;
using mgl::MartingaleLabel;
using mgl::RandomVariable;
using mgl::Rational;
using mgl::StopValue;

std::vector<Rational> q(std::initializer_list<long> values) {
  std::vector<Rational> out;
  for (long v : values) out.emplace_back(v);
  return out;
}

mgl::StoppingTime first_hit(const AdaptedProcess& x, const Rational& level, bool censor) {
  return mgl::hitting_time(x, [&](const Rational& v) { return v >= level; }, censor);
}

TEST(CoinWalk, SmallHorizons) {
  const auto one = mgl::make_coin_walk(1, Rational(1, 2));
  EXPECT_EQ(one.walk[1].values(), q({1, -1}));
  EXPECT_EQ(mgl::expectation(one.walk[1], one.model.measure), 0);

  const auto two = mgl::make_coin_walk(2, Rational(1, 2));
  EXPECT_EQ(two.model.space->labels(), (std::vector<std::string>{"HH", "HT", "TH", "TT"}));
  EXPECT_EQ(two.walk[2].values(), q({2, 0, 0, -2}));
  EXPECT_EQ(mgl::classify(two.walk, two.model.measure).label, MartingaleLabel::martingale);

  const auto biased = mgl::make_coin_walk(2, Rational(1, 4));
  const auto c = mgl::classify(biased.walk, biased.model.measure);
  EXPECT_EQ(c.label, MartingaleLabel::strict_supermartingale);
  ASSERT_TRUE(c.witness);
  EXPECT_EQ(c.witness->step, 0u);
  EXPECT_EQ(c.witness->drift, Rational(-1, 2));
}

TEST(CoinWalk, RejectsBadParameters) {
  EXPECT_THROW(mgl::make_coin_tree(0, Rational(1, 2)), mgl::InputError);
  EXPECT_THROW(mgl::make_coin_tree(3, Rational(3, 2)), mgl::InputError);
  EXPECT_THROW(mgl::make_coin_tree(mgl::kMaxCoinHorizon + 1, Rational(1, 2)), mgl::SizeError);
}

TEST(Filtration, RejectsNonRefiningStages) {
  const auto s = mgl::SampleSpace::indexed(4);
  const auto a = mgl::SigmaAlgebra::from_partition(s, {mgl::EventSet::of({0, 1}, 4), mgl::EventSet::of({2, 3}, 4)});
  const auto b = mgl::SigmaAlgebra::from_partition(s, {mgl::EventSet::of({0, 2}, 4), mgl::EventSet::of({1, 3}, 4)});
  EXPECT_THROW(mgl::Filtration(s, {a, b}), mgl::InputError);
}

TEST(AdaptedProcess, RejectsUnadaptedValues) {
  const auto w = mgl::make_coin_walk(2, Rational(1, 2));
  std::vector<RandomVariable> values = w.walk.values();
  values[1] = RandomVariable(w.model.space, q({1, 0, 0, 0}));
  EXPECT_THROW(AdaptedProcess(w.model.filtration, values), mgl::InputError);
}

TEST(Classify, ConstantAndRising) {
  const auto w = mgl::make_coin_walk(3, Rational(1, 2));
  const auto constant = mgl::make_process(w.model.filtration, [](std::size_t, std::size_t) { return Rational(7); });
  EXPECT_EQ(mgl::classify(constant, w.model.measure).label, MartingaleLabel::martingale);
  const auto rising = mgl::make_process(w.model.filtration, [](std::size_t, std::size_t n) { return Rational(n); });
  EXPECT_EQ(mgl::classify(rising, w.model.measure).label, MartingaleLabel::strict_submartingale);
}

TEST(Classify, MixedDriftIsNone) {
  const auto w = mgl::make_coin_walk(2, Rational(1, 2));
  // Up-drift on the first step, down-drift on the second.
  const auto x = mgl::make_process(w.model.filtration, [](std::size_t, std::size_t n) {
    return Rational(n == 1 ? 1 : 0);
  });
  const auto c = mgl::classify(x, w.model.measure);
  EXPECT_EQ(c.label, MartingaleLabel::none);
  ASSERT_TRUE(c.witness);
  EXPECT_EQ(c.witness->step, 1u);
}

TEST(Transform, Examples) {
  const auto w = mgl::make_coin_walk(2, Rational(1, 2));
  const auto ones = mgl::make_predictable(w.model.filtration, [](std::size_t, std::size_t) { return Rational(1); });
  const auto y = mgl::transform(ones, w.walk);
  for (std::size_t n = 0; n <= 2; ++n) EXPECT_EQ(y[n], w.walk[n] - w.walk[0]);

  const auto zeros = mgl::make_predictable(w.model.filtration, [](std::size_t, std::size_t) { return Rational(0); });
  EXPECT_EQ(mgl::transform(zeros, w.walk)[2].values(), q({0, 0, 0, 0}));
  EXPECT_TRUE(mgl::verify_transform_preservation(zeros, w.walk, w.model.measure, 1).theorem_holds());

  // Double the stake after a first-flip loss.
  const auto doubling = mgl::make_predictable(w.model.filtration, [&](std::size_t i, std::size_t n) {
    return Rational(n == 2 && w.walk[1][i] < 0 ? 2 : 1);
  });
  const auto yd = mgl::transform(doubling, w.walk);
  EXPECT_EQ(yd[2].values(), q({2, 0, 1, -3}));
  EXPECT_EQ(mgl::expectation(yd[2], w.model.measure), 0);
  const auto report = mgl::verify_transform_preservation(doubling, w.walk, w.model.measure, 2);
  EXPECT_TRUE(report.hypothesis_holds);
  EXPECT_TRUE(report.theorem_holds());
  EXPECT_EQ(report.output_label, MartingaleLabel::martingale);

  const auto pyth = mgl::l2_pythagoras_check(yd, w.model.measure);
  EXPECT_EQ(pyth.lhs, Rational(7, 2));  // 1 + E[C_2^2] = 1 + 5/2
  EXPECT_TRUE(pyth.theorem_holds());
}

TEST(Transform, NegativeBetsOnSupermartingaleFailHypothesis) {
  const auto w = mgl::make_coin_walk(3, Rational(1, 4));
  const auto minus = mgl::make_predictable(w.model.filtration, [](std::size_t, std::size_t) { return Rational(-1); });
  const auto r = mgl::verify_transform_preservation(minus, w.walk, w.model.measure, 1);
  EXPECT_FALSE(r.hypothesis_holds);
  EXPECT_TRUE(mgl::is_submartingale(r.output_label));
  EXPECT_TRUE(r.drift_identity_holds);
}

TEST(StoppingTime, Validation) {
  const auto w = mgl::make_coin_walk(2, Rational(1, 2));
  const std::vector<StopValue> zero(4, StopValue(0));
  EXPECT_TRUE(mgl::is_stopping_time(zero, *w.model.filtration));
  const auto hit = first_hit(w.walk, 1, false);
  EXPECT_EQ(hit.values(), (std::vector<StopValue>{1, 1, mgl::kNever, mgl::kNever}));

  // Time of the maximum: HH -> 2, HT -> 1 splits the first-stage atom {HH, HT}.
  const std::vector<StopValue> argmax{2, 1, 0, 0};
  EXPECT_FALSE(mgl::is_stopping_time(argmax, *w.model.filtration));
  EXPECT_THROW(mgl::StoppingTime(w.model.filtration, argmax), mgl::InputError);
  const std::vector<StopValue> too_late(4, StopValue(3));
  EXPECT_THROW(mgl::StoppingTime(w.model.filtration, too_late), mgl::InputError);
}

TEST(StoppedProcess, Examples) {
  const auto w = mgl::make_coin_walk(2, Rational(1, 2));
  const auto f = w.model.filtration;
  const mgl::StoppingTime at_end(f, std::vector<StopValue>(4, StopValue(2)));
  const mgl::StoppingTime at_start(f, std::vector<StopValue>(4, StopValue(0)));
  for (std::size_t n = 0; n <= 2; ++n) {
    EXPECT_EQ(mgl::stopped_process(w.walk, at_end)[n], w.walk[n]);
    EXPECT_EQ(mgl::stopped_process(w.walk, at_start)[n], w.walk[0]);
  }
  const auto stopped = mgl::stopped_process(w.walk, first_hit(w.walk, 1, false));
  EXPECT_EQ(stopped[2].values(), q({1, 1, 0, -2}));
  EXPECT_EQ(mgl::expectation(stopped[2], w.model.measure), 0);

  const auto check = mgl::stopped_process_check(w.walk, first_hit(w.walk, 1, false), w.model.measure);
  EXPECT_TRUE(check.theorem_holds());
  EXPECT_TRUE(check.transform_identity_holds);
  EXPECT_EQ(check.stopped_label, MartingaleLabel::martingale);
}

TEST(OptionalStopping, Examples) {
  const auto w = mgl::make_coin_walk(10, Rational(1, 2));
  const auto censored = mgl::optional_stopping_report(w.walk, first_hit(w.walk, 1, true), w.model.measure);
  EXPECT_TRUE(censored.time_bounded);
  EXPECT_TRUE(censored.theorem_holds());
  EXPECT_TRUE(censored.hypothesis_holds);
  EXPECT_EQ(censored.expected_stopped, 0);

  const auto uncensored = mgl::optional_stopping_report(w.walk, first_hit(w.walk, 1, false), w.model.measure);
  EXPECT_FALSE(uncensored.hypothesis_holds);
  EXPECT_GT(uncensored.never_probability, 0);
  EXPECT_NE(uncensored.note.find("tau unbounded at horizon; conclusion not asserted"), std::string::npos);

  const auto d = mgl::make_coin_walk(3, Rational(1, 2));
  const auto down = mgl::make_process(d.model.filtration, [](std::size_t, std::size_t n) { return Rational(-long(n)); });
  const mgl::StoppingTime two(d.model.filtration, std::vector<StopValue>(8, StopValue(2)));
  const auto r = mgl::optional_stopping_report(down, two, d.model.measure);
  EXPECT_EQ(r.expected_stopped, -2);
  EXPECT_EQ(r.expected_initial, 0);
  EXPECT_TRUE(r.hypothesis_holds);
  EXPECT_TRUE(r.conclusion_holds);
}

TEST(TailBound, FirstHeads) {
  const auto w = mgl::make_coin_walk(16, Rational(1, 2));
  const auto heads_seen = mgl::make_process(w.model.filtration, [&](std::size_t i, std::size_t n) {
    for (std::size_t k = 1; k <= n; ++k)
      if (w.model.heads(i, k)) return Rational(1);
    return Rational(0);
  });
  const auto tau = first_hit(heads_seen, 1, false);
  const auto r = mgl::stopping_tail_bound_check(tau, w.model.measure, 1, Rational(1, 3));
  EXPECT_TRUE(r.hypothesis_holds);
  EXPECT_TRUE(r.bound_holds);
  ASSERT_EQ(r.chain.size(), 17u);
  for (const auto& step : r.chain) {
    EXPECT_EQ(step.tail_probability, mgl::pow(Rational(1, 2), static_cast<unsigned>(step.k)));
    EXPECT_EQ(step.geometric_bound, mgl::pow(Rational(2, 3), static_cast<unsigned>(step.k)));
  }
  EXPECT_LE(r.truncated_expectation, 3);
  EXPECT_EQ(r.expectation_bound, 3);
}

TEST(TailBound, TrivialAndDeterministicLate) {
  const auto w = mgl::make_coin_walk(4, Rational(1, 2));
  const mgl::StoppingTime zero(w.model.filtration, std::vector<StopValue>(16, StopValue(0)));
  const auto r0 = mgl::stopping_tail_bound_check(zero, w.model.measure, 1, Rational(1, 2));
  EXPECT_TRUE(r0.hypothesis_holds);
  EXPECT_TRUE(r0.bound_holds);
  EXPECT_EQ(r0.chain[0].tail_probability, 0);

  const mgl::StoppingTime late(w.model.filtration, std::vector<StopValue>(16, StopValue(4)));
  const auto r4 = mgl::stopping_tail_bound_check(late, w.model.measure, 1, Rational(1, 2));
  EXPECT_FALSE(r4.hypothesis_holds);
  EXPECT_EQ(r4.min_conditional_probability.front(), 0);
  EXPECT_TRUE(r4.theorem_holds());
}

TEST(Upcrossings, CountExamples) {
  const std::vector<long> path{0, -1, 2, -1, 3};
  EXPECT_EQ(mgl::count_upcrossings<long>(path, 0, 1), 2u);
  const std::vector<long> rising{-2, -1, 0, 1, 2};
  EXPECT_EQ(mgl::count_upcrossings<long>(rising, -1, 1), 1u);
  const std::vector<long> flat{3, 3, 3};
  EXPECT_EQ(mgl::count_upcrossings<long>(flat, 0, 1), 0u);
  EXPECT_THROW(mgl::count_upcrossings<long>(flat, 1, 1), mgl::InputError);
}

TEST(Upcrossings, InequalityOnWalks) {
  for (std::size_t n : {4u, 6u}) {
    const auto w = mgl::make_coin_walk(n, Rational(1, 2));
    const Rational a = n == 4 ? 0 : -1;
    const auto r = mgl::upcrossing_inequality_check(w.walk, w.model.measure, a, 1);
    EXPECT_TRUE(r.hypothesis_holds);
    EXPECT_TRUE(r.inequality_holds);
    EXPECT_TRUE(r.corollary_holds);
    if (n == 6) EXPECT_LT(r.lhs, r.rhs);
  }
  const auto w = mgl::make_coin_walk(3, Rational(1, 2));
  const auto constant = mgl::make_process(w.model.filtration, [](std::size_t, std::size_t) { return Rational(2); });
  const auto r = mgl::upcrossing_inequality_check(constant, w.model.measure, 0, 1);
  EXPECT_EQ(r.expected_upcrossings, 0);
  EXPECT_TRUE(r.theorem_holds());
}

TEST(Pythagoras, WalkAndConstant) {
  for (std::size_t n = 1; n <= 8; ++n) {
    const auto w = mgl::make_coin_walk(n, Rational(1, 2));
    const auto r = mgl::l2_pythagoras_check(w.walk, w.model.measure);
    EXPECT_EQ(r.lhs, Rational(static_cast<long>(n)));
    EXPECT_TRUE(r.theorem_holds());
  }
  const auto w = mgl::make_coin_walk(2, Rational(1, 2));
  const auto c = mgl::make_process(w.model.filtration, [](std::size_t, std::size_t) { return Rational(3); });
  const auto r = mgl::l2_pythagoras_check(c, w.model.measure);
  EXPECT_EQ(r.lhs, 9);
  EXPECT_EQ(r.rhs, 9);
}

TEST(ConvergenceDiagnostic, Examples) {
  const auto w = mgl::make_coin_walk(10, Rational(1, 2));
  const std::vector<std::pair<Rational, Rational>> grid{{0, 1}, {-1, 1}, {Rational(1, 2), 2}};
  const auto product = mgl::make_process(w.model.filtration, [&](std::size_t i, std::size_t n) {
    Rational v = 1;
    for (std::size_t k = 1; k <= n; ++k) v *= w.model.heads(i, k) ? Rational(3, 2) : Rational(1, 2);
    return v;
  });
  const auto r = mgl::truncated_convergence_diagnostic(product, w.model.measure, grid);
  EXPECT_TRUE(r.hypothesis_holds);
  EXPECT_EQ(r.sup_abs_mean, 1);
  EXPECT_FALSE(r.abs_mean_growing);
  for (const auto& d : r.intervals) EXPECT_LE(d.expected_upcrossings, d.bound);

  const auto walk = mgl::truncated_convergence_diagnostic(w.walk, w.model.measure, grid);
  EXPECT_TRUE(walk.abs_mean_growing);
  EXPECT_FALSE(walk.note.empty());

  const auto constant = mgl::make_process(w.model.filtration, [](std::size_t, std::size_t) { return Rational(1); });
  for (const auto& d : mgl::truncated_convergence_diagnostic(constant, w.model.measure, grid).intervals) {
    EXPECT_EQ(d.expected_upcrossings, 0);
  }
}

// ---------------------------------------------------------------------------
// Properties on random filtrations

struct Instance {
  mgl::SpacePtr space;
  std::vector<Rational> weights;
  mgl::ProbabilityMeasure measure;
  mgl::FiltrationPtr filtration;
};

Instance random_instance(oracle::Gen& gen, std::size_t max_size = 8, std::size_t max_horizon = 4) {
  const std::size_t n = gen.index(2, max_size);
  auto space = gen.space(n);
  auto weights = gen.weights(n, true);
  mgl::ProbabilityMeasure measure(space, weights);
  auto filtration = gen.filtration(space, gen.index(1, max_horizon));
  return {space, weights, measure, filtration};
}

TEST(ClassifyProperty, GeneratedProcessesClassifyAsBuilt) {
  oracle::Gen gen(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const auto inst = random_instance(gen);
    const auto m = gen.martingale(inst.filtration, inst.weights);
    ASSERT_EQ(mgl::classify(m, inst.measure).label, MartingaleLabel::martingale);
    const auto s = gen.supermartingale(inst.filtration, inst.weights);
    ASSERT_TRUE(mgl::is_supermartingale(mgl::classify(s, inst.measure).label));
    const auto neg = mgl::make_process(inst.filtration, [&](std::size_t i, std::size_t k) { return Rational(-s[k][i]); });
    ASSERT_TRUE(mgl::is_submartingale(mgl::classify(neg, inst.measure).label));
  }
}

TEST(TransformProperty, PreservesMartingalesAndSupermartingales) {
  oracle::Gen gen(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto inst = random_instance(gen);
    const auto m = gen.martingale(inst.filtration, inst.weights);
    const auto c = gen.predictable(inst.filtration, -3, 3);
    const auto r = mgl::verify_transform_preservation(c, m, inst.measure, 3);
    ASSERT_TRUE(r.hypothesis_holds);
    ASSERT_TRUE(r.theorem_holds());
    ASSERT_EQ(r.output_label, MartingaleLabel::martingale);

    const auto s = gen.supermartingale(inst.filtration, inst.weights);
    const auto cp = gen.predictable(inst.filtration, 0, 3);
    const auto rs = mgl::verify_transform_preservation(cp, s, inst.measure, 3);
    ASSERT_TRUE(rs.hypothesis_holds);
    ASSERT_TRUE(rs.theorem_holds());
    ASSERT_TRUE(mgl::is_supermartingale(rs.output_label));
  }
}

TEST(StoppedProperty, MeansAndLabels) {
  oracle::Gen gen(8);
  for (int trial = 0; trial < 200; ++trial) {
    const auto inst = random_instance(gen);
    const auto m = gen.martingale(inst.filtration, inst.weights);
    const mgl::StoppingTime tau(inst.filtration, gen.stopping_time(inst.filtration, 0.3, true));
    const auto r = mgl::stopped_process_check(m, tau, inst.measure);
    ASSERT_TRUE(r.theorem_holds());
    for (const auto& e : r.expected_stopped) ASSERT_EQ(e, r.expected_initial);

    const auto s = gen.supermartingale(inst.filtration, inst.weights);
    const auto rs = mgl::stopped_process_check(s, tau, inst.measure);
    ASSERT_TRUE(rs.theorem_holds());
    ASSERT_TRUE(mgl::is_supermartingale(rs.stopped_label));
  }
}

TEST(StoppingTimeProperty, GeneratedTimesValidate) {
  oracle::Gen gen(9);
  for (int trial = 0; trial < 200; ++trial) {
    const auto inst = random_instance(gen);
    const auto tau = gen.stopping_time(inst.filtration, 0.4, true);
    ASSERT_TRUE(mgl::is_stopping_time(tau, *inst.filtration));
    const mgl::StoppingTime st(inst.filtration, tau);
    const auto c = mgl::stopping_indicator(st);
    for (std::size_t n = 1; n <= inst.filtration->horizon(); ++n) {
      for (std::size_t i = 0; i < tau.size(); ++i) {
        ASSERT_EQ(c.at(n)[i], Rational(!tau[i] || n <= *tau[i] ? 1 : 0));
      }
    }
  }
}

TEST(OptionalStoppingProperty, BoundedTimesOnMartingales) {
  oracle::Gen gen(10);
  for (int trial = 0; trial < 200; ++trial) {
    const auto inst = random_instance(gen);
    const auto m = gen.martingale(inst.filtration, inst.weights);
    const mgl::StoppingTime tau(inst.filtration, gen.stopping_time(inst.filtration));
    const auto r = mgl::optional_stopping_report(m, tau, inst.measure);
    ASSERT_TRUE(r.hypothesis_holds);
    ASSERT_TRUE(r.conclusion_holds);
    ASSERT_EQ(r.expected_stopped, r.expected_initial);
  }
}

TEST(UpcrossingProperty, RandomSupermartingales) {
  oracle::Gen gen(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto inst = random_instance(gen, 8, 6);
    const auto s = gen.supermartingale(inst.filtration, inst.weights);
    Rational a = gen.rational(-4, 2), b = a + gen.rational(1, 4);
    if (b <= a) b = a + 1;
    const auto r = mgl::upcrossing_inequality_check(s, inst.measure, a, b);
    ASSERT_TRUE(r.hypothesis_holds);
    ASSERT_TRUE(r.inequality_holds) << "lhs " << r.lhs << " rhs " << r.rhs;
    ASSERT_TRUE(r.corollary_holds);
  }
}

TEST(PythagorasProperty, RandomMartingales) {
  oracle::Gen gen(12);
  for (int trial = 0; trial < 200; ++trial) {
    const auto inst = random_instance(gen);
    const auto m = gen.martingale(inst.filtration, inst.weights);
    const auto r = mgl::l2_pythagoras_check(m, inst.measure);
    ASSERT_TRUE(r.hypothesis_holds);
    ASSERT_EQ(r.gap, 0);
    ASSERT_TRUE(r.all_orthogonal);
    ASSERT_TRUE(r.nonzero_products.empty());

    // Oracle: lhs and rhs by direct sums.
    const auto n = m.horizon();
    std::vector<Rational> sq(m[0].size());
    for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = m[0][i] * m[0][i];
    Rational rhs = oracle::expect(sq, inst.weights);
    for (std::size_t k = 1; k <= n; ++k) {
      for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = (m[k][i] - m[k - 1][i]) * (m[k][i] - m[k - 1][i]);
      rhs += oracle::expect(sq, inst.weights);
    }
    ASSERT_EQ(r.rhs, rhs);
  }
}

}  // namespace
