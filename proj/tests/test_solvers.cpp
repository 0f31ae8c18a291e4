#include <gtest/gtest.h>

#include <cmath>

#include "mpshrink/errors.hpp"
#include "mpshrink/mpcs.hpp"
#include "mpshrink/mpvs.hpp"
#include "test_support.hpp"

using namespace mpshrink;

namespace {

Pattern pattern_of(const std::vector<double>& y) {
  Pattern p;
  for (std::uint32_t i = 0; i < y.size(); ++i)
    if (y[i] != 0.0) {
      p.features.push_back({i, y[i]});
      p.sq_norm += y[i] * y[i];
    }
  return p;
}

}  // namespace

TEST(Mpcs, SingleUpdateIsShrinkThenAdd) {
  Hyperparams hp;
  hp.eta = 0.5;
  hp.lambda = 0.5;
  TrainState s(2);
  s.w = {4, 2};
  const auto p = pattern_of({1, -1});
  mpcs::apply(s, p, 1, hp);
  EXPECT_EQ(s.t, 1u);
  EXPECT_EQ(s.weights(), (std::vector<double>{3.5, 1.0}));
}

TEST(Mpcs, MultiplicityClosedFormLambdaZero) {
  Hyperparams hp;
  hp.eta = 0.5;
  hp.b = 3.0;
  // dot goes 0 -> 1 -> 2 -> 3 -> 4 with ||y||^2 = 2: four legal steps.
  EXPECT_EQ(mpcs::max_multiplicity(0.0, 2.0, hp), 4u);
  EXPECT_EQ(mpcs::max_multiplicity(0.0, 2.0, hp, 3), 3u);
  EXPECT_EQ(mpcs::max_multiplicity(3.0, 2.0, hp), 1u);
  EXPECT_THROW(mpcs::max_multiplicity(3.5, 2.0, hp), InvalidParams);
}

TEST(Mpcs, MultiplicityRejectsUnreachableFixedPoint) {
  Hyperparams hp;
  hp.eta = 0.1;
  hp.b = 1.0;
  hp.lambda = 2.0;  // fixed point ||y||^2/lambda = 1 would never exceed b
  EXPECT_THROW(mpcs::max_multiplicity(0.0, 2.0, hp), InvalidParams);
}

TEST(Mpcs, MultipleUpdateMatchesChainedAndIsJustViolating) {
  gen::Rng rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t dim = 6;
    const auto y = gen::random_unit(rng, dim);
    const auto p = pattern_of(y);
    Hyperparams hp;
    hp.b = 0.5 + u(rng);
    hp.eta = 0.001 + 0.2 * u(rng);
    hp.lambda = u(rng) < 0.2 ? 0.0 : 0.9 * u(rng) * p.sq_norm / hp.b;
    hp.lup = 200;
    TrainState s(dim);
    s.w = gen::random_unit(rng, dim);
    for (auto& v : s.w) v *= 2.0 * u(rng);
    if (!mpcs::condition(s, p, hp)) continue;

    const auto mu = mpcs::max_multiplicity(s.dot(p), p.sq_norm, hp);
    TrainState one = s, chained = s;
    mpcs::apply(one, p, mu, hp);
    for (std::uint64_t j = 0; j < mu; ++j) {
      ASSERT_TRUE(mpcs::condition(chained, p, hp)) << "constituent " << j << " of " << mu;
      mpcs::apply(chained, p, 1, hp);
    }
    if (mu < hp.lup) EXPECT_FALSE(mpcs::condition(chained, p, hp));
    const auto a = one.weights(), b = chained.weights();
    for (std::size_t i = 0; i < dim; ++i) EXPECT_NEAR(a[i], b[i], 1e-9 * (1.0 + std::abs(b[i])));
    EXPECT_EQ(one.t, chained.t);
  }
}

TEST(Mpcs, ScaleFoldsBeforeUnderflow) {
  Hyperparams hp;
  hp.eta = 0.9;
  hp.lambda = 1.0;
  hp.b = 0.5;
  TrainState s(2);
  const auto p = pattern_of({1, 0});
  for (int i = 0; i < 200; ++i) mpcs::apply(s, p, 1, hp);
  EXPECT_GE(s.scale, 1e-100);
  EXPECT_NEAR(s.weights()[0], 1.0, 1e-12);  // fixed point eta/(eta*lambda) ||y|| = 1
}

TEST(Mpvs, Threshold) {
  Hyperparams hp;
  hp.b = 2.0;
  hp.n = 3;
  EXPECT_EQ(mpvs::threshold(0, hp), 2.0);
  EXPECT_EQ(mpvs::threshold(2, hp), 54.0);
}

TEST(Mpvs, MultiplicityScan) {
  Hyperparams hp;
  hp.eta = 1.0;
  hp.b = 0.5;
  hp.n = 0;
  // Toy pattern ||y||^2 = 2 from a = 0: first step legal, second is not.
  const auto m = mpvs::max_multiplicity(0.0, 2.0, 0, hp);
  EXPECT_EQ(m.mu, 1u);
  EXPECT_EQ(m.sum_jn, 1.0);
  hp.n = 1;
  hp.b = 1.0;
  hp.eta = 0.1;
  // dot 0, thresholds 1,2,3,...; dot after j steps 0.2 * (1+...+j).
  const auto k = mpvs::max_multiplicity(0.0, 2.0, 0, hp);
  double sum = 0.0;
  std::uint64_t j = 0;
  while (0.2 * sum <= static_cast<double>(j + 1)) sum += static_cast<double>(++j);
  EXPECT_EQ(k.mu, j);
  EXPECT_THROW(mpvs::max_multiplicity(1.5, 2.0, 0, Hyperparams{.b = 1.0, .n = 0}), InvalidParams);
}

TEST(Mpvs, MultipleUpdateMatchesChainedAndIsJustViolating) {
  gen::Rng rng(22);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> nd(0, 6);
  std::uniform_int_distribution<std::uint64_t> td(0, 5000);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t dim = 5;
    const auto p = pattern_of(gen::random_unit(rng, dim));
    Hyperparams hp;
    hp.b = 0.5 + u(rng);
    hp.eta = 0.001 + 0.5 * u(rng);
    hp.n = nd(rng);
    hp.lup = 300;
    TrainState s(dim);
    s.t = td(rng);
    s.w = gen::random_unit(rng, dim);
    const double scale = mpvs::threshold(s.t, hp) * (u(rng) * 2.0);
    for (auto& v : s.w) v *= scale;
    if (!mpvs::condition(s, p, hp)) continue;

    const auto m = mpvs::max_multiplicity(s, p, hp);
    TrainState one = s, chained = s;
    mpvs::apply(one, p, m.mu, m.sum_jn, hp);
    for (std::uint64_t j = 0; j < m.mu; ++j) {
      ASSERT_TRUE(mpvs::condition(chained, p, hp));
      mpvs::apply(chained, p, 1, mpvs::ipow(static_cast<double>(chained.t + 1), hp.n), hp);
    }
    if (m.mu < hp.lup) EXPECT_FALSE(mpvs::condition(chained, p, hp));
    const auto a = one.weights(), b = chained.weights();
    for (std::size_t i = 0; i < dim; ++i)
      EXPECT_NEAR(a[i], b[i], 1e-9 * (std::abs(s.w[i]) + std::abs(b[i])));
    EXPECT_EQ(one.t, chained.t);
    EXPECT_DOUBLE_EQ(one.powersum, chained.powersum);
  }
}
