// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "dpst/delay_optimizer.hpp"
#include "dpst/error.hpp"
#include "dpst/linalg.hpp"
#include "unit/test_util.hpp"

namespace {

using dpst::ComplexMatrix;
using namespace dpst::optim;
using dpst::shaping::ShapingConfig;

ChannelEnsemble ensemble(std::size_t n, std::size_t size, std::uint64_t seed = 5,
                         dpst::channel::ChannelMode mode = dpst::channel::ChannelMode::Correlated) {
  EnsembleSpec spec;
  spec.n_tx = n;
  spec.n_rx = n;
  spec.size = size;
  spec.seed = seed;
  spec.mode = mode;
  return make_ensemble(spec);
}

ShapingConfig with_delays(std::vector<double> d) {
  ShapingConfig c;
  c.delays = std::move(d);
  return c;
}

TEST(DelayGrid, EvenlySpacedInsideOpenInterval) {
  DelaySearchConfig s;
  s.grid_points_per_dim = 4;
  const auto g = delay_grid(s, 1.0);
  ASSERT_EQ(g.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(g[i], (i + 1) / 5.0);
  s.max_delay = 0.5;
  EXPECT_DOUBLE_EQ(delay_grid(s, 1.0).back(), 0.4);
}

TEST(DelaySearchConfig, ValidationNamesKeys) {
  const auto key_of = [](const DelaySearchConfig &s) {
    try {
      s.validate(1.0);
    } catch (const dpst::ConfigError &e) {
      return e.key();
    }
    return std::string();
  };
  DelaySearchConfig s;
  EXPECT_EQ(key_of(s), "");
  s.grid_points_per_dim = 1;
  EXPECT_EQ(key_of(s), "search.grid_points_per_dim");
  s = {};
  s.epsilon = 1.0;
  EXPECT_EQ(key_of(s), "search.epsilon");
  s = {};
  s.ensemble_size = 0;
  EXPECT_EQ(key_of(s), "search.ensemble_size");
  s = {};
  s.max_delay = 1.5;
  EXPECT_EQ(key_of(s), "search.max_delay");
}

TEST(Ensemble, DeterministicPerSeed) {
  const auto a = ensemble(2, 10, 3);
  const auto b = ensemble(2, 10, 3);
  const auto c = ensemble(2, 10, 4);
  EXPECT_EQ(a.channels, b.channels);
  EXPECT_NE(a.channels, c.channels);
  const auto longer = ensemble(2, 20, 3);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(a.channels[i], longer.channels[i]);
}

TEST(Covariance, ZeroDelayIsKroneckerOfGram) {
  dpst::Rng rng(1, 0);
  for (std::size_t m : {1u, 2u, 3u, 4u}) {
    const auto h = dpst::test::random_matrix(3, 2, rng);
    ShapingConfig c;
    c.m_len = m;
    c.tx_oversampling = 1;
    const std::vector<double> zeros(2, 0.0);
    const auto r = shaped_channel_covariance(h, zeros, c);
    const auto ref = dpst::kron(h.adjoint() * h, ComplexMatrix::identity(m));
    EXPECT_LT(dpst::max_abs_diff(r, ref), 1e-12);
  }
}

TEST(Covariance, HermitianPsdAndQuadratic) {
  dpst::Rng rng(2, 0);
  const ShapingConfig c;
  const std::vector<double> d = {0.0, 0.35, 0.6};
  for (int t = 0; t < 10; ++t) {
    const auto h = dpst::test::random_matrix(3, 3, rng);
    const auto r = shaped_channel_covariance(h, d, c);
    EXPECT_LT(dpst::hermitian_defect(r), 1e-12);
    EXPECT_GE(dpst::hermitian_eigenvalues(r).front(), -1e-10);
    EXPECT_LT(dpst::max_abs_diff(shaped_channel_covariance(2.0 * h, d, c), 4.0 * r), 1e-12);
  }
  const auto h = dpst::test::random_matrix(2, 2, rng);
  EXPECT_THROW(shaped_channel_covariance(h, d, c), std::invalid_argument);
}

TEST(DiagonalizationObjective, Examples) {
  EXPECT_EQ(diagonalization_objective(ComplexMatrix{{4, 0}, {0, 9}}), 0.0);
  EXPECT_NEAR(diagonalization_objective(ComplexMatrix::ones(2, 2)), 1.41421, 1e-5);
  dpst::Rng rng(3, 0);
  const auto r = dpst::test::random_hermitian_psd(4, rng);
  EXPECT_NEAR(diagonalization_objective(7.5 * r), diagonalization_objective(r), 1e-12);
  EXPECT_THROW(diagonalization_objective(ComplexMatrix{{1, 0}, {0, 0}}), std::invalid_argument);
}

TEST(ConditionMetric, Examples) {
  const std::vector<double> zeros = {0.0, 0.0};
  EXPECT_GT(condition_metric(ComplexMatrix::ones(2, 2), zeros, ShapingConfig{}), 1e6);
  // With a flat spectrum the metric is the energy ratio of the two received
  // pulses. It stays near 1 while the delayed pulse of the centre symbol
  // remains inside the M-symbol window and grows once tau * M pushes it past
  // the window edge (tau >= 0.5 for M = 10).
  const auto opt = ensemble(2, 20, 7, dpst::channel::ChannelMode::Optimum);
  for (double tau : {0.0, 0.1, 0.2, 0.3, 0.4, 0.45}) {
    const std::vector<double> d = {0.0, tau};
    for (const auto &h : opt.channels) {
      const double k = condition_metric(h, d, ShapingConfig{});
      EXPECT_GE(k, 1.0 - 1e-9);
      EXPECT_LT(k, 2.0) << tau;
    }
  }
  for (double tau : {0.5, 0.7, 0.9}) {
    const std::vector<double> d = {0.0, tau};
    EXPECT_GT(condition_metric(opt.channels.front(), d, ShapingConfig{}), 2.0) << tau;
  }
}

// The fast evaluator must agree with the literal matrix pipeline draw by draw.
TEST(DelayEvaluator, MatchesLiteralPipeline) {
  for (std::size_t n : {2u, 3u, 4u}) {
    const auto ens = ensemble(n, 6, 11);
    DelaySearchConfig s;
    s.grid_points_per_dim = 9;
    const ShapingConfig cfg;
    for (auto metric : {SearchMetric::ConditionNumber, SearchMetric::CovarianceDiagonalization}) {
      s.metric = metric;
      const DelayEvaluator ev(ens, s, cfg);
      ASSERT_EQ(ev.grid().size(), 10u);
      EXPECT_EQ(ev.grid()[0], 0.0);
      for (const auto &idx : {std::vector<std::size_t>(n, 0), std::vector<std::size_t>{0, 3, 7, 1}}) {
        const std::span<const std::size_t> ix(idx.data(), n);
        std::vector<double> delays(n);
        for (std::size_t j = 0; j < n; ++j) delays[j] = ev.grid()[ix[j]];
        for (std::size_t draw = 0; draw < ens.channels.size(); ++draw) {
          const auto &h = ens.channels[draw];
          const double fast = ev.evaluate_draw(draw, ix);
          const double literal = metric == SearchMetric::ConditionNumber
                                     ? condition_metric(h, delays, with_delays(delays))
                                     : diagonalization_objective(shaped_channel_covariance(h, delays, cfg));
          if (std::isinf(literal) || literal > 1e8) {
            EXPECT_GT(fast, 1e6);
          } else {
            EXPECT_NEAR(fast, literal, 1e-6 * literal) << n << " draw " << draw;
          }
        }
      }
    }
  }
}

TEST(DelayEvaluator, DiagonalizationNeverTouchesReceiveSide) {
  const auto ens = ensemble(3, 8);
  DelaySearchConfig s;
  s.grid_points_per_dim = 12;
  s.metric = SearchMetric::CovarianceDiagonalization;
  const auto before = dpst::shaping::rx_interpolation_calls();
  const DelayEvaluator ev(ens, s, ShapingConfig{});
  for (std::size_t g = 1; g <= 12; ++g) (void)ev.evaluate(std::vector<std::size_t>{0, g, 13 - g});
  EXPECT_EQ(dpst::shaping::rx_interpolation_calls(), before);

  s.metric = SearchMetric::ConditionNumber;
  const DelayEvaluator cond(ens, s, ShapingConfig{});
  EXPECT_GT(dpst::shaping::rx_interpolation_calls(), before);
}

TEST(DelayEvaluator, RejectsBadIndices) {
  const auto ens = ensemble(2, 2);
  DelaySearchConfig s;
  s.grid_points_per_dim = 5;
  const DelayEvaluator ev(ens, s, ShapingConfig{});
  EXPECT_THROW(ev.evaluate(std::vector<std::size_t>{1, 2}), std::invalid_argument);
  EXPECT_THROW(ev.evaluate(std::vector<std::size_t>{0, 6}), std::invalid_argument);
  EXPECT_THROW(ev.evaluate(std::vector<std::size_t>{0}), std::invalid_argument);
}

TEST(OptimizeDelays, TwoByTwoMatchesBruteForce) {
  const auto ens = ensemble(2, 25, 13);
  DelaySearchConfig s;
  s.grid_points_per_dim = 30;
  const ShapingConfig cfg;
  const auto res = optimize_delays(ens, s, cfg);
  ASSERT_EQ(res.metric_trace.size(), 30u);
  const DelayEvaluator ev(ens, s, cfg);
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_g = 0;
  for (std::size_t g = 1; g <= 30; ++g) {
    const std::vector<std::size_t> idx = {0, g};
    const double v = ev.evaluate(idx);
    EXPECT_EQ(res.metric_trace[g - 1].value, v);
    EXPECT_EQ(res.metric_trace[g - 1].delays[1], ev.grid()[g]);
    EXPECT_FALSE(res.metric_trace[g - 1].refinement);
    // Literal pipeline as an independent oracle for the ensemble mean.
    double lit = 0.0;
    const std::vector<double> d = {0.0, ev.grid()[g]};
    for (const auto &h : ens.channels) lit += condition_metric(h, d, with_delays(d));
    lit /= static_cast<double>(ens.channels.size());
    EXPECT_NEAR(v, lit, 1e-6 * lit);
    if (v < best) {
      best = v;
      best_g = g;
    }
  }
  EXPECT_EQ(res.delays[1], ev.grid()[best_g]);
  EXPECT_EQ(res.objective_value, best);
  for (const auto &tp : res.metric_trace) EXPECT_LE(res.objective_value, tp.value);
}

TEST(OptimizeDelays, FlatObjectiveTakesSmallestDelay) {
  ChannelEnsemble flat;
  flat.channels.assign(4, ComplexMatrix{{1, 0}, {1, 0}});
  DelaySearchConfig s;
  s.grid_points_per_dim = 10;
  const auto res = optimize_delays(flat, s, ShapingConfig{});
  EXPECT_TRUE(std::isinf(res.objective_value));
  EXPECT_DOUBLE_EQ(res.delays[1], 1.0 / 11.0);

  ChannelEnsemble flat3;
  flat3.channels.assign(2, ComplexMatrix{{1, 0, 0}, {1, 0, 0}, {1, 0, 0}});
  const auto r3 = optimize_delays(flat3, s, ShapingConfig{});
  EXPECT_DOUBLE_EQ(r3.delays[1], 1.0 / 11.0);
  EXPECT_DOUBLE_EQ(r3.delays[2], 1.0 / 11.0);
}

TEST(OptimizeDelays, DeterministicAcrossThreads) {
  const auto ens = ensemble(3, 10, 17);
  DelaySearchConfig s;
  s.grid_points_per_dim = 20;
  const auto a = optimize_delays(ens, s, ShapingConfig{}, 1);
  const auto b = optimize_delays(ens, s, ShapingConfig{}, 4);
  EXPECT_EQ(a.delays, b.delays);
  EXPECT_EQ(a.objective_value, b.objective_value);
  ASSERT_EQ(a.metric_trace.size(), b.metric_trace.size());
  for (std::size_t i = 0; i < a.metric_trace.size(); ++i) {
    EXPECT_EQ(a.metric_trace[i].delays, b.metric_trace[i].delays);
    EXPECT_EQ(a.metric_trace[i].value, b.metric_trace[i].value);
  }
}

TEST(OptimizeDelays, MultiAntennaCoarseThenRefine) {
  const auto ens = ensemble(3, 10, 19);
  DelaySearchConfig s;
  s.grid_points_per_dim = 20;
  s.evaluation_budget = 140;  // 10^2 coarse + 2 * 20 refinement
  const auto res = optimize_delays(ens, s, ShapingConfig{});
  EXPECT_EQ(res.coarse_points_per_dim, 10u);
  std::size_t coarse = 0, refine = 0;
  for (const auto &tp : res.metric_trace) (tp.refinement ? refine : coarse)++;
  EXPECT_EQ(coarse, 100u);
  EXPECT_EQ(refine, 40u);
  const auto fine = delay_grid(s, 1.0);
  for (const auto &tp : res.metric_trace) {
    EXPECT_EQ(tp.delays[0], 0.0);
    for (std::size_t j = 1; j < 3; ++j) EXPECT_NE(std::find(fine.begin(), fine.end(), tp.delays[j]), fine.end());
    EXPECT_LE(res.objective_value, tp.value);
  }
  ASSERT_EQ(res.delays.size(), 3u);
  EXPECT_EQ(res.delays[0], 0.0);
}

TEST(OptimizeDelays, BudgetErrors) {
  const auto ens = ensemble(3, 2);
  DelaySearchConfig s;
  s.grid_points_per_dim = 50;
  s.evaluation_budget = 103;  // cannot fit 2^2 + 2 * 50
  try {
    (void)optimize_delays(ens, s, ShapingConfig{});
    FAIL() << "expected ConfigError";
  } catch (const dpst::ConfigError &e) {
    EXPECT_EQ(e.key(), "search.evaluation_budget");
  }
  const auto ens2 = ensemble(2, 2);
  s.evaluation_budget = 49;
  EXPECT_THROW(optimize_delays(ens2, s, ShapingConfig{}), dpst::ConfigError);
  ChannelEnsemble one;
  one.channels.assign(1, ComplexMatrix::identity(1));
  EXPECT_THROW(optimize_delays(one, DelaySearchConfig{}, ShapingConfig{}), std::invalid_argument);
}

class ReferenceEnsemble : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    ens_ = new ChannelEnsemble(ensemble(2, 200, 1));
    res_ = new DelaySearchResult(optimize_delays(*ens_, DelaySearchConfig{}, ShapingConfig{}));
  }
  static void TearDownTestSuite() {
    delete ens_;
    delete res_;
  }
  static double mean_metric(double tau) {
    const std::vector<double> d = {0.0, tau};
    double acc = 0.0;
    for (const auto &h : ens_->channels) acc += condition_metric(h, d, with_delays(d));
    return acc / static_cast<double>(ens_->channels.size());
  }
  static inline ChannelEnsemble *ens_ = nullptr;
  static inline DelaySearchResult *res_ = nullptr;
};

TEST_F(ReferenceEnsemble, OptimumBeatsZeroDelay) {
  EXPECT_LT(mean_metric(res_->delays[1]), mean_metric(0.0));
}

TEST_F(ReferenceEnsemble, OptimumBeatsLateDelayByTenPercent) {
  EXPECT_LT(mean_metric(res_->delays[1]), 0.9 * mean_metric(0.9));
}

TEST_F(ReferenceEnsemble, MeanConditionBelowTwo) {
  EXPECT_LT(res_->objective_value, 2.0);
  EXPECT_NEAR(mean_metric(res_->delays[1]), res_->objective_value, 1e-6 * res_->objective_value);
  ASSERT_EQ(res_->mean_normalized_sigma.size(), 2u);
  EXPECT_TRUE(res_->within_epsilon);
}

}  // namespace
