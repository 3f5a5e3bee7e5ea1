// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include <gtest/gtest.h>

#include <cmath>

#include "cfrsma/bessel.hpp"
#include "cfrsma/channel.hpp"
#include "cfrsma/linalg.hpp"
#include "test_support.hpp"

namespace cfrsma {
namespace {

using testing::CrossMoment;
using testing::relative_frobenius;
using testing::to_vec;

// Power series summed term by term.
double series_j0(double x) {
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 30; ++k) {
    term *= -(x * x / 4.0) / (static_cast<double>(k) * k);
    sum += term;
  }
  return sum;
}

TEST(Bessel, ReferenceValues) {
  EXPECT_DOUBLE_EQ(bessel_j0(0.0), 1.0);
  EXPECT_NEAR(bessel_j0(1.0), 0.7651976866, 1e-10);
  EXPECT_NEAR(bessel_j0(1.0), series_j0(1.0), 1e-14);
  EXPECT_LT(std::abs(bessel_j0(2.404825557695773)), 1e-9);
  EXPECT_DOUBLE_EQ(bessel_j0(-3.5), bessel_j0(3.5));
}

TEST(Bessel, AgreesWithStandardLibraryOverRange) {
  for (double x = 0.0; x <= 100.0; x += 0.0371) {
    EXPECT_NEAR(bessel_j0(x), std::cyl_bessel_j(0.0, x), 1e-10) << "x = " << x;
  }
}

TEST(TemporalCorrelation, Examples) {
  EXPECT_DOUBLE_EQ(temporal_corr(7, 7, 40.0, 2e9, 66.7e-6), 1.0);
  for (int t = 1; t <= 100; ++t) EXPECT_DOUBLE_EQ(temporal_corr(t, 20, 0.0, 2e9, 66.7e-6), 1.0);
  const double fd = doppler_hz(40.0, 2e9);
  EXPECT_NEAR(fd, 74.12, 0.01);
  EXPECT_NEAR(2.0 * kPi * fd * 66.7e-6 * 10.0, 0.3105, 3e-4);
  EXPECT_NEAR(temporal_corr(30, 20, 40.0, 2e9, 66.7e-6), 0.976, 5e-4);
  EXPECT_DOUBLE_EQ(temporal_corr(30, 20, 40.0, 2e9, 66.7e-6), temporal_corr(10, 20, 40.0, 2e9, 66.7e-6));
}

TEST(TemporalCorrelation, DecreasesUpToFirstZero) {
  const double step = 2.0 * kPi * doppler_hz(200.0, 2e9) * 66.7e-6;
  double prev = 1.0;
  for (int lag = 1; lag * step <= 2.40; ++lag) {
    const double r = temporal_corr(1 + lag, 1, 200.0, 2e9, 66.7e-6);
    EXPECT_LT(r, prev);
    prev = r;
  }
}

TEST(AgingProfile, PerUeCoefficients) {
  SimConfig c = testing::small_config();
  c.velocity_kmh = {0.0, 40.0, 100.0, 200.0};
  const Timing timing = resolve_timing(c);
  const AgingProfile aging(c, timing);
  for (int t = 1; t <= c.tau_c; ++t) {
    EXPECT_DOUBLE_EQ(aging.rho(0, t), 1.0);
    EXPECT_DOUBLE_EQ(aging.rho_bar(0, t), 0.0);
    for (int k = 1; k < 4; ++k) {
      EXPECT_NEAR(aging.rho(k, t) * aging.rho(k, t) + aging.rho_bar(k, t) * aging.rho_bar(k, t), 1.0, 1e-12);
    }
  }
  EXPECT_DOUBLE_EQ(aging.rho(3, aging.lambda()), 1.0);
}

TEST(DrawChannel, PureLineOfSightKeepsAmplitudes) {
  arma::cx_vec h_bar = {cx{0.3, 0.4}, cx{-1.0, 0.0}, cx{0.0, 2.0}};
  const arma::cx_mat r_sqrt(3, 3, arma::fill::zeros);
  Engine eng(1);
  ComplexGaussian gauss;
  arma::cx_vec out(3);
  for (int s = 0; s < 100; ++s) {
    const double phi = draw_channel(h_bar, r_sqrt, eng, gauss, out.memptr());
    for (int i = 0; i < 3; ++i) {
      EXPECT_NEAR(std::abs(out[i]), std::abs(h_bar[i]), 1e-12);
      EXPECT_NEAR(std::abs(out[i] - h_bar[i] * std::polar(1.0, phi)), 0.0, 1e-12);
    }
  }
}

TEST(DrawChannel, ZeroMeanWithoutLineOfSight) {
  const arma::cx_mat r = spatial_correlation(0.4, 20.0, 4);
  const arma::cx_mat r_sqrt = hermitian_sqrt(r);
  const arma::cx_vec h_bar(4, arma::fill::zeros);
  Engine eng(2);
  ComplexGaussian gauss;
  arma::cx_vec out(4), sum(4, arma::fill::zeros);
  const int draws = 100000;
  for (int s = 0; s < draws; ++s) {
    draw_channel(h_bar, r_sqrt, eng, gauss, out.memptr());
    sum += out;
  }
  EXPECT_LT(arma::norm(sum / draws), 0.02 * std::sqrt(real_trace(r)));
}

TEST(DrawChannel, CovarianceMatchesLosPlusScattering) {
  const int n = 4;
  const arma::cx_mat r = 0.4 * spatial_correlation(0.4, 20.0, n);
  const arma::cx_vec h_bar = std::sqrt(0.6) * los_steering(0.4, n);
  const arma::cx_mat r_sqrt = hermitian_sqrt(r);
  Engine eng(3);
  ComplexGaussian gauss;
  arma::cx_vec out(n), mean(n, arma::fill::zeros);
  CrossMoment cov(n);
  for (int s = 0; s < 100000; ++s) {
    draw_channel(h_bar, r_sqrt, eng, gauss, out.memptr());
    cov.add(out, out);
    mean += out;
  }
  EXPECT_LT(relative_frobenius(cov.mean(), h_bar * h_bar.t() + r), 0.03);
  EXPECT_LT(arma::norm(mean / 100000.0), 0.02);
}

class ChannelBlockTest : public ::testing::Test {
 protected:
  void SetUp() override {
    config = testing::small_config();
    timing = resolve_timing(config);
    topology = drop_network(config, 0);
    aging = AgingProfile(config, timing);
  }
  SimConfig config;
  Timing timing;
  Topology topology;
  AgingProfile aging;
};

TEST_F(ChannelBlockTest, AnchorInstantReturnsAnchor) {
  ChannelBlock block(topology, aging, config.seed, 0);
  block.start_realization(0);
  const int lambda = timing.lambda();
  for (int m = 0; m < topology.num_aps; ++m) {
    for (int k = 0; k < topology.num_ues; ++k) {
      const arma::cx_vec h = block.channel_at(m, k, lambda);
      EXPECT_TRUE(arma::approx_equal(h, to_vec(block.anchor(m, k)), "absdiff", 0.0));
    }
  }
}

TEST_F(ChannelBlockTest, StaticUsersKeepTheAnchor) {
  config.velocity_kmh = {0.0};
  const AgingProfile still(config, timing);
  ChannelBlock block(topology, still, config.seed, 0);
  block.start_realization(4);
  for (int t = 1; t <= timing.tau_c; t += 7) {
    EXPECT_TRUE(arma::approx_equal(block.channel_at(1, 2, t), to_vec(block.anchor(1, 2)), "absdiff", 0.0));
  }
}

TEST_F(ChannelBlockTest, ReadsAreMemoizedAndDeterministic) {
  ChannelBlock block(topology, aging, config.seed, 0);
  block.start_realization(9);
  const arma::cx_vec first = block.channel_at(2, 3, 40);
  const arma::cx_vec other = block.channel_at(0, 3, 41);
  EXPECT_TRUE(arma::approx_equal(block.channel_at(2, 3, 40), first, "absdiff", 0.0));

  ChannelBlock fresh(topology, aging, config.seed, 0);
  fresh.start_realization(9);
  // Reverse access order: values must not depend on it.
  EXPECT_TRUE(arma::approx_equal(fresh.channel_at(0, 3, 41), other, "absdiff", 0.0));
  EXPECT_TRUE(arma::approx_equal(fresh.channel_at(2, 3, 40), first, "absdiff", 0.0));

  fresh.start_realization(10);
  EXPECT_FALSE(arma::approx_equal(fresh.channel_at(2, 3, 40), first, "absdiff", 0.0));
}

TEST_F(ChannelBlockTest, OutOfBlockInstantsThrow) {
  ChannelBlock block(topology, aging, config.seed, 0);
  block.start_realization(0);
  EXPECT_THROW(block.channel_at(0, 0, 0), std::out_of_range);
  EXPECT_THROW(block.channel_at(0, 0, timing.tau_c + 1), std::out_of_range);
  EXPECT_THROW(block.innovation(0, 0, -3), std::out_of_range);
  EXPECT_NO_THROW(block.channel_at(0, 0, timing.tau_c));
}

TEST_F(ChannelBlockTest, StationaryCovarianceAndAgingCorrelation) {
  ChannelBlock block(topology, aging, config.seed, 0);
  const int m = 1, k = 2;
  const int t1 = timing.lambda() + 30;
  const int t2 = 2;
  const int n = topology.antennas;
  CrossMoment at_t1(n), cross_anchor(n), cross_pilot(n);
  const int draws = 40000;
  for (int r = 0; r < draws; ++r) {
    block.start_realization(static_cast<std::uint64_t>(r));
    const arma::cx_vec h1 = block.channel_at(m, k, t1);
    const arma::cx_vec h2 = block.channel_at(m, k, t2);
    const arma::cx_vec anchor = to_vec(block.anchor(m, k));
    at_t1.add(h1, h1);
    cross_anchor.add(h1, anchor);
    cross_pilot.add(h1, h2);
  }
  const arma::cx_mat& r_bar = topology.r_bar[topology.pair(m, k)];
  EXPECT_LT(relative_frobenius(at_t1.mean(), r_bar), 0.03);
  const double rho1 = aging.rho(k, t1);
  const double rho2 = aging.rho(k, t2);
  EXPECT_LT(relative_frobenius(cross_anchor.mean(), rho1 * r_bar), 0.04);
  EXPECT_LT(relative_frobenius(cross_pilot.mean(), rho1 * rho2 * r_bar), 0.05);
}

}  // namespace
}  // namespace cfrsma
