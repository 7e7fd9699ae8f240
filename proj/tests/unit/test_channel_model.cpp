// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>

#include "dpst/channel_model.hpp"
#include "dpst/error.hpp"
#include "dpst/linalg.hpp"
#include "unit/test_util.hpp"

namespace {

using dpst::ComplexMatrix;
using namespace dpst::channel;

TEST(RicianK, Examples) {
  EXPECT_EQ(rician_k(1.0), 32.0);
  EXPECT_EQ(rician_k(17.999), 32.0);
  // Reference values from a double-precision evaluation of
  // 140.10 * exp(-0.107 d).
  EXPECT_NEAR(rician_k(18.0), 20.416766557213318, 1e-12);
  EXPECT_NEAR(rician_k(100.0), 0.0031585458016410305, 1e-15);
  EXPECT_THROW(rician_k(0.0), std::invalid_argument);
  EXPECT_THROW(rician_k(-3.0), std::invalid_argument);
}

TEST(RicianK, NonIncreasingBeyondStep) {
  double prev = rician_k(18.0);
  for (double d = 18.5; d < 300.0; d += 0.5) {
    const double k = rician_k(d);
    EXPECT_LE(k, prev);
    prev = k;
  }
}

TEST(SpatialCorrelation, Examples) {
  EXPECT_EQ(spatial_correlation(1, 1, 1, 1, 0.5, 0.5), 1.0);
  EXPECT_EQ(spatial_correlation(0, 3, 0, 3, 2.7, 0.1), 1.0);
  EXPECT_NEAR(spatial_correlation(0, 0, 0, 1, 0.5, 0.5), -0.304242, 1e-6);
  EXPECT_NEAR(spatial_correlation(0, 0, 1, 1, 0.5, 0.5), 0.092563, 1e-6);
  EXPECT_EQ(spatial_correlation(0, 1, 1, 0, 0.5, 0.5), spatial_correlation(1, 0, 0, 1, 0.5, 0.5));
}

TEST(CorrelationMatrices, Examples) {
  ChannelParams p;
  const auto c = build_correlation_matrices(p);
  EXPECT_NEAR(c.r_tx(0, 1).real(), -0.304242, 1e-6);
  EXPECT_EQ(c.r_tx(0, 1), c.r_tx(1, 0));
  p.tx_spacing_wl = 0.0;
  p.n_tx = 3;
  EXPECT_EQ(build_correlation_matrices(p).r_tx, ComplexMatrix::ones(3, 3));
  p.n_rx = 1;
  EXPECT_EQ(build_correlation_matrices(p).r_rx, ComplexMatrix::identity(1));
}

TEST(CorrelationMatrices, SymmetricUnitDiagonalPsd) {
  for (std::size_t n : {1u, 2u, 4u, 8u}) {
    for (double s : {0.1, 0.25, 0.5, 1.0, 1.7}) {
      ChannelParams p;
      p.n_tx = n;
      p.n_rx = n;
      p.tx_spacing_wl = s;
      p.rx_spacing_wl = s;
      const auto c = build_correlation_matrices(p);
      for (const auto *r : {&c.r_tx, &c.r_rx}) {
        EXPECT_EQ(*r, r->transpose());
        for (std::size_t i = 0; i < n; ++i) EXPECT_EQ((*r)(i, i), dpst::cplx(1.0));
        EXPECT_GE(dpst::hermitian_eigenvalues(*r).front(), -1e-10);
      }
    }
  }
}

TEST(WhiteChannel, Statistics) {
  dpst::Rng rng(42, 0);
  const int draws = 100000;
  dpst::cplx mean = 0.0;
  double var = 0.0;
  for (int i = 0; i < draws; ++i) {
    const auto h = sample_white_channel(1, 1, rng);
    mean += h(0, 0);
    var += std::norm(h(0, 0));
  }
  EXPECT_LT(std::abs(mean / static_cast<double>(draws)), 0.01);
  EXPECT_NEAR(var / draws, 1.0, 0.02);

  dpst::Rng a(42, 0), b(42, 0);
  EXPECT_EQ(sample_white_channel(2, 2, a), sample_white_channel(2, 2, b));
}

TEST(AssembleChannel, LosLimit) {
  ChannelParams p;
  p.distance_m = 1.0;
  p.k_factor_override = 1e9;
  dpst::Rng rng(3, 0);
  const auto r = assemble_channel(p, rng);
  EXPECT_LT(dpst::max_abs_diff(r.h, ComplexMatrix::ones(2, 2)), 1e-4);
}

TEST(AssembleChannel, NlosLimit) {
  ChannelParams p;
  p.n_tx = 3;
  p.n_rx = 2;
  p.k_factor_override = 0.0;
  dpst::Rng rng(3, 1), replay(3, 1);
  const auto r = assemble_channel(p, rng);
  const auto hw = sample_white_channel(2, 3, replay);
  const auto ref = dpst::psd_sqrt(r.r_rx) * hw * dpst::psd_sqrt(r.r_tx);
  EXPECT_LT(dpst::max_abs_diff(r.h, ref), 1e-12);
  EXPECT_EQ(r.k_factor, 0.0);
}

TEST(AssembleChannel, RayleighIsWhite) {
  ChannelParams p;
  p.mode = ChannelMode::Rayleigh;
  dpst::Rng rng(8, 2), replay(8, 2);
  EXPECT_EQ(assemble_channel(p, rng).h, sample_white_channel(2, 2, replay));
}

TEST(AssembleChannel, OptimumFlattensSpectrumAndKeepsNorm) {
  for (std::size_t n : {2u, 4u}) {
    ChannelParams p;
    p.n_tx = n;
    p.n_rx = n;
    for (std::uint64_t s = 0; s < 50; ++s) {
      dpst::Rng a(9, s), b(9, s);
      p.mode = ChannelMode::Correlated;
      const auto corr = assemble_channel(p, a);
      p.mode = ChannelMode::Optimum;
      const auto opt = assemble_channel(p, b);
      EXPECT_NEAR(dpst::condition_number(opt.h), 1.0, 1e-9);
      EXPECT_NEAR(dpst::frobenius_norm(opt.h), dpst::frobenius_norm(corr.h), 1e-9);
    }
  }
}

TEST(AssembleChannel, MeanPowerMatchesArraySize) {
  for (double d : {5.0, 20.0, 60.0}) {
    ChannelParams p;
    p.distance_m = d;
    p.n_tx = 4;
    p.n_rx = 4;
    const ChannelGenerator gen(4, 4, 0.5, 0.5);
    double acc = 0.0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
      dpst::Rng rng(11, static_cast<std::uint64_t>(i));
      const double f = dpst::frobenius_norm(gen.draw(d, ChannelMode::Correlated, rng).h);
      acc += f * f;
    }
    EXPECT_NEAR(acc / draws, 16.0, 0.03 * 16.0) << d;
  }
}

TEST(AssembleChannel, GeneratorMatchesOneShot) {
  ChannelParams p;
  p.distance_m = 25.0;
  const ChannelGenerator gen(2, 2, 0.5, 0.5);
  dpst::Rng a(4, 4), b(4, 4);
  EXPECT_EQ(assemble_channel(p, a).h, gen.draw(25.0, ChannelMode::Correlated, b).h);
}

TEST(AssembleChannel, RejectsBadParams) {
  ChannelParams p;
  p.distance_m = 0.0;
  dpst::Rng rng(1, 1);
  EXPECT_THROW(assemble_channel(p, rng), std::invalid_argument);
  p.distance_m = 1.0;
  p.n_tx = 0;
  EXPECT_THROW(assemble_channel(p, rng), std::invalid_argument);
}

std::pair<double, double> exact_eigs(const ComplexMatrix &h) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dpst::test::to_eigen(h * h.adjoint()));
  return {es.eigenvalues()(1), es.eigenvalues()(0)};
}

TEST(SvApprox, Examples) {
  auto [l1, l2] = sv_approx_2x2(ComplexMatrix{{1, 0}, {0, 0}});
  EXPECT_DOUBLE_EQ(l1, 1.0);
  EXPECT_DOUBLE_EQ(l2, 0.0);
  std::tie(l1, l2) = sv_approx_2x2(ComplexMatrix::identity(2));
  EXPECT_DOUBLE_EQ(l1, 1.5);
  EXPECT_DOUBLE_EQ(l2, 0.5);
  const ComplexMatrix ill{{10, 0}, {0, 0.1}};
  std::tie(l1, l2) = sv_approx_2x2(ill);
  const auto [e1, e2] = exact_eigs(ill);
  EXPECT_NEAR(l1, e1, 1e-3 * e1);
  EXPECT_NEAR(l2, e2, 1e-3 * e2);
  EXPECT_THROW(sv_approx_2x2(ComplexMatrix(2, 2)), std::invalid_argument);
  EXPECT_THROW(sv_approx_2x2(ComplexMatrix::identity(3)), std::invalid_argument);
}

TEST(SvApprox, AccurateWhenIllConditioned) {
  const ChannelGenerator gen(2, 2, 0.5, 0.5);
  int checked = 0;
  for (std::uint64_t s = 0; s < 2000; ++s) {
    dpst::Rng rng(21, s);
    const auto h = gen.draw(10.0, ChannelMode::Correlated, rng).h;
    const auto [l1, l2] = sv_approx_2x2(h);
    const double f = dpst::frobenius_norm(h);
    EXPECT_NEAR(l1 + l2, f * f, 1e-12 * f * f);
    if (dpst::condition_number(h) <= 10.0) continue;
    ++checked;
    const auto [e1, e2] = exact_eigs(h);
    EXPECT_LT(std::abs(l2 - e2) / e2, 0.05);
  }
  EXPECT_GT(checked, 100);
}

TEST(Capacity, Examples) {
  EXPECT_NEAR(capacity(ComplexMatrix::identity(2), 3.0), 2.0 * std::log2(2.5), 1e-12);
  EXPECT_NEAR(capacity(ComplexMatrix::identity(2), 3.0), 2.6439, 1e-4);
  EXPECT_EQ(capacity(ComplexMatrix(2, 2), 5.0), 0.0);
  EXPECT_THROW(capacity(ComplexMatrix::identity(2), 0.0), std::invalid_argument);
}

TEST(Capacity, SumFormMatchesDeterminant) {
  dpst::Rng rng(31, 0);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 2 + static_cast<std::size_t>(i % 3);
    const auto h = dpst::test::random_matrix(n, n, rng);
    const double snr = std::pow(10.0, rng.uniform(-1.0, 3.0));
    EXPECT_NEAR(capacity(h, snr), capacity_logdet(h, snr), 1e-9);
  }
}

}  // namespace
