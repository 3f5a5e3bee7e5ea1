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

#include <algorithm>

#include "cfrsma/dl_estimation.hpp"
#include "cfrsma/linalg.hpp"
#include "cfrsma/link_sim.hpp"
#include "test_support.hpp"

namespace cfrsma {
namespace {

struct DlFixture {
  explicit DlFixture(SimConfig c, std::uint64_t drop = 0) : config(std::move(c)), model(prepare_drop(config, drop)) {}
  SimConfig config;
  DropModel model;
  const Topology& topology() const { return model.topology; }
};

TEST(LambdaMatrix, MapsObserverCorrelationToSource) {
  DlFixture f(testing::small_config());
  const Topology& t = f.topology();
  for (int m = 0; m < t.num_aps; ++m) {
    for (int k = 0; k < t.num_ues; ++k) {
      for (int i : t.pilot_sets[k]) {
        const arma::cx_mat lam = lambda_matrix(t, m, i, k);
        EXPECT_LT(testing::relative_frobenius(lam * t.r_bar[t.pair(m, k)], t.r_bar[t.pair(m, i)]), 1e-8);
      }
    }
  }
}

TEST(LambdaMatrix, SingularCorrelationIsReported) {
  DlFixture f(testing::small_config());
  Topology t = f.topology();
  // Pure line of sight: rank-one correlation.
  t.set_link_statistics(0, 1, arma::cx_mat(2, 2, arma::fill::zeros), los_steering(0.3, 2));
  EXPECT_THROW(lambda_matrix(t, 0, 0, 1), StatisticsError);
}

// Prior means written as traces of the correlation ratio times the estimate covariance.
TEST(ClosedForm, MeansMatchCorrelationRatioTraces) {
  DlFixture f(testing::small_config());
  const Topology& t = f.topology();
  const DropModel& d = f.model;
  auto shares_pilot = [&](int i, int k) { return t.pilot_index[i] == t.pilot_index[k]; };
  for (int l = 0; l < t.num_clusters; ++l) {
    for (int k = 0; k < t.num_ues; ++k) {
      cx expected{};
      for (int m : t.aps_in_cluster[l]) {
        for (int i : t.ues_in_cluster[l]) {
          if (!shares_pilot(i, k)) continue;
          expected += std::sqrt(d.plan.p_common[m] * d.plan.eta_common[m]) *
                      arma::trace(lambda_matrix(t, m, i, k) * d.ul.r_hat[t.pair(m, k)]);
        }
      }
      EXPECT_LT(std::abs(d.dl.common_of(l, k).mean - expected), 1e-9 * std::abs(expected));
    }
  }
  for (int k = 0; k < t.num_ues; ++k) {
    for (std::size_t idx = 0; idx < t.pilot_sets[k].size(); ++idx) {
      const int i = t.pilot_sets[k][idx];
      cx expected{};
      for (int m : t.aps_in_cluster[t.cluster_of_ue[i]]) {
        expected += std::sqrt(d.plan.p_private[m] * d.plan.eta_private[t.pair(m, i)]) *
                    arma::trace(lambda_matrix(t, m, i, k) * d.ul.r_hat[t.pair(m, k)]);
      }
      EXPECT_LT(std::abs(d.dl.private_means[k][idx] - expected), 1e-9 * std::abs(expected));
    }
  }
}

void expect_estimator_invariants(const ScalarStats& s, double noise_w) {
  EXPECT_GE(s.r_tilde, -1e-9 * s.r);
  EXPECT_GE(s.r_hat, 0.0);
  EXPECT_GE(s.psi, noise_w);
  if (s.r > 0.0) {
    EXPECT_GE(s.psi * (1.0 + 1e-12), std::norm(s.theta) / s.r);
  }
  EXPECT_NEAR(s.r_hat, std::norm(s.theta) / s.psi, 1e-12 * s.r);
  EXPECT_NEAR(s.r_tilde, s.r - s.r_hat, 1e-12 * s.r);
}

TEST(ClosedForm, EstimatorInvariantsAcrossDrops) {
  for (Mode mode : {Mode::kRsmaDlPilots, Mode::kSdma}) {
    SimConfig c = testing::small_config();
    c.num_aps = 8;
    c.num_ues = 8;
    c.num_clusters = 4;
    c.mode = mode;
    for (std::uint64_t drop = 0; drop < 5; ++drop) {
      DlFixture f(c, drop);
      for (const ScalarStats& s : f.model.dl.common) expect_estimator_invariants(s, c.noise_w());
      for (const ScalarStats& s : f.model.dl.priv) expect_estimator_invariants(s, c.noise_w());
      EXPECT_EQ(f.model.dl.has_common, mode != Mode::kSdma);
    }
  }
}

TEST(ClosedForm, PerfectTrainingLimit) {
  SimConfig c = testing::small_config();
  c.num_clusters = 1;
  c.velocity_kmh = {0.0};
  c.noise_dbm = -250.0;
  DlFixture f(c);
  for (const ScalarStats& s : f.model.dl.common) EXPECT_LT(s.r_tilde, 1e-6 * s.r);
  for (const ScalarStats& s : f.model.dl.priv) EXPECT_LT(s.r_tilde, 1e-6 * s.r);
}

TEST(ClosedForm, CommonVarianceIgnoresUeOrderInsideCluster) {
  DlFixture f(testing::small_config());
  Topology shuffled = f.topology();
  for (auto& ues : shuffled.ues_in_cluster) std::reverse(ues.begin(), ues.end());
  const DlStatistics again =
      dl_stats_closed_form(shuffled, f.model.ul, f.model.plan, f.model.aging, f.model.timing, f.config);
  for (std::size_t i = 0; i < again.common.size(); ++i) {
    EXPECT_NEAR(again.common[i].r, f.model.dl.common[i].r, 1e-12 * f.model.dl.common[i].r);
    EXPECT_NEAR(again.common[i].psi, f.model.dl.common[i].psi, 1e-12 * f.model.dl.common[i].psi);
  }
}

TEST(ScalarLmmse, FallbackAndAffineSlope) {
  ScalarStats s;
  s.mean = {2.0, -1.0};
  s.pilot_mean = {0.5, 0.5};
  s.psi = 4.0;
  EXPECT_EQ(scalar_lmmse({10.0, 3.0}, s), s.mean);
  s.theta = {1.0, 2.0};
  const cx y1{0.3, -0.7}, y2{-1.1, 2.5};
  const cx slope = (scalar_lmmse(y2, s) - scalar_lmmse(y1, s)) / (y2 - y1);
  EXPECT_NEAR(std::abs(slope - std::conj(s.theta) / s.psi), 0.0, 1e-15);
  EXPECT_EQ(dl_common_lmmse(s.pilot_mean, s), s.mean);
  EXPECT_EQ(dl_private_lmmse(s.pilot_mean, s), s.mean);
  s.psi = 0.0;
  EXPECT_THROW(scalar_lmmse(y1, s), StatisticsError);
}

class RealizationTest : public ::testing::Test {
 protected:
  RealizationState realize(DlFixture& f, ChannelBlock& block, std::uint64_t r) {
    return start_realization(block, f.model, r);
  }
};

TEST_F(RealizationTest, WithoutDlPilotsUesUsePriorMeans) {
  SimConfig c = testing::small_config();
  c.mode = Mode::kRsmaNoDlPilots;
  DlFixture f(c);
  ChannelBlock block(f.topology(), f.model.aging, c.seed, 0);
  const RealizationState s = realize(f, block, 3);
  EXPECT_TRUE(s.dl.obs_common.empty());
  EXPECT_TRUE(s.dl.obs_private.empty());
  for (std::size_t i = 0; i < s.dl.common.size(); ++i) EXPECT_EQ(s.dl.common[i], f.model.dl.common[i].mean);
  for (int k = 0; k < c.num_ues; ++k) EXPECT_EQ(s.dl.priv[k], f.model.dl.priv[k].mean);
}

TEST_F(RealizationTest, PilotObservationsAndDecomposition) {
  DlFixture f(testing::small_config());
  const Topology& t = f.topology();
  const Timing& timing = f.model.timing;
  const AgingProfile& aging = f.model.aging;
  ChannelBlock block(t, aging, f.config.seed, 0);
  const RealizationState s = realize(f, block, 0);
  const int lambda = timing.lambda();
  for (int l = 0; l < t.num_clusters; ++l) {
    for (int k = 0; k < t.num_ues; ++k) {
      const int tt = timing.dl_common_instant(l);
      const cx direct = effective_common(block, s.precoders, l, k, tt);
      EXPECT_EQ(receive_dl_common_pilot(block, s.precoders, timing, l, k, cx{}), direct);
      cx innov{};
      for (int m : t.aps_in_cluster[l]) {
        innov += std::sqrt(f.model.plan.p_common[m]) * cdot(block.innovation(m, k, tt), s.precoders.common_of(m));
      }
      const cx split = aging.rho(k, tt) * effective_common(block, s.precoders, l, k, lambda) +
                       aging.rho_bar(k, tt) * innov;
      EXPECT_LT(std::abs(direct - split), 1e-12 * std::abs(direct));
    }
  }
  for (int k = 0; k < t.num_ues; ++k) {
    const int tt = timing.dl_private_instant(t.pilot_index[k]);
    cx sum{};
    for (int i : t.pilot_sets[k]) sum += effective_private(block, s.precoders, k, i, tt);
    const cx noise{1e-7, -2e-7};
    EXPECT_LT(std::abs(receive_dl_private_pilot(block, s.precoders, timing, k, noise) - (sum + noise)),
              1e-12 * std::abs(sum));
  }
}

TEST_F(RealizationTest, SingleClusterPrivatePilotIsUncontaminated) {
  SimConfig c = testing::small_config();
  c.num_clusters = 1;
  DlFixture f(c);
  const Topology& t = f.topology();
  ChannelBlock block(t, f.model.aging, c.seed, 0);
  const RealizationState s = realize(f, block, 1);
  for (int k = 0; k < t.num_ues; ++k) {
    ASSERT_EQ(t.pilot_sets[k].size(), 1u);
    const int tt = f.model.timing.dl_private_instant(t.pilot_index[k]);
    EXPECT_EQ(receive_dl_private_pilot(block, s.precoders, f.model.timing, k, cx{}),
              effective_private(block, s.precoders, k, k, tt));
  }
}

TEST_F(RealizationTest, StaticNoiselessCommonPilotEqualsAnchorChannel) {
  SimConfig c = testing::small_config();
  c.velocity_kmh = {0.0};
  DlFixture f(c);
  ChannelBlock block(f.topology(), f.model.aging, c.seed, 0);
  const RealizationState s = realize(f, block, 2);
  for (int l = 0; l < c.num_clusters; ++l) {
    for (int k = 0; k < c.num_ues; ++k) {
      EXPECT_EQ(receive_dl_common_pilot(block, s.precoders, f.model.timing, l, k, cx{}),
                effective_common(block, s.precoders, l, k, f.model.timing.lambda()));
    }
  }
}

TEST_F(RealizationTest, NoCommonPowerMeansNoCommonChannel) {
  SimConfig c = testing::small_config();
  c.power_split = 1.0;
  DlFixture f(c);
  ChannelBlock block(f.topology(), f.model.aging, c.seed, 0);
  const RealizationState s = realize(f, block, 0);
  for (int l = 0; l < c.num_clusters; ++l) {
    for (int k = 0; k < c.num_ues; ++k) EXPECT_EQ(effective_common(block, s.precoders, l, k, 50), cx{});
  }
}

// Sampling oracles on one drop of the small instance.
TEST(DlOracle, MseOrthogonalityMeanAndDecomposition) {
  DlFixture f(testing::small_config());
  const Topology& t = f.topology();
  const DropModel& d = f.model;
  const int num_ues = t.num_ues;
  const int lambda = d.timing.lambda();
  const std::size_t commons = d.dl.common.size();
  std::vector<double> mse_c(commons, 0.0), mse_p(num_ues, 0.0);
  std::vector<cx> orth_c(commons), orth_p(num_ues), pilot_sum(num_ues);
  std::vector<cx> split_sum(commons);
  std::vector<double> split_sq(commons, 0.0);
  ChannelBlock block(t, d.aging, f.config.seed, 0);
  const int draws = 100000;
  for (int r = 0; r < draws; ++r) {
    const RealizationState s = start_realization(block, d, static_cast<std::uint64_t>(r));
    for (int l = 0; l < t.num_clusters; ++l) {
      for (int k = 0; k < num_ues; ++k) {
        const std::size_t idx = static_cast<std::size_t>(l) * num_ues + k;
        const cx a = s.common_anchor[idx];
        const cx err = a - s.dl.common[idx];
        mse_c[idx] += std::norm(err);
        orth_c[idx] += s.dl.common[idx] * std::conj(err);
        const int tt = d.timing.dl_common_instant(l);
        const cx z = effective_common(block, s.precoders, l, k, tt) - d.aging.rho(k, tt) * a;
        split_sum[idx] += z;
        split_sq[idx] += std::norm(z);
      }
    }
    for (int k = 0; k < num_ues; ++k) {
      const cx err = s.private_anchor[k] - s.dl.priv[k];
      mse_p[k] += std::norm(err);
      orth_p[k] += s.dl.priv[k] * std::conj(err);
      pilot_sum[k] += s.dl.obs_private[k];
    }
    EXPECT_EQ(s.common_anchor[0], effective_common(block, s.precoders, 0, 0, lambda));
  }
  for (std::size_t idx = 0; idx < commons; ++idx) {
    const ScalarStats& s = d.dl.common[idx];
    EXPECT_NEAR(mse_c[idx] / draws, s.r_tilde, 0.03 * s.r_tilde) << "common " << idx;
    EXPECT_LT(std::abs(orth_c[idx] / static_cast<double>(draws)), 0.02 * s.r) << "common " << idx;
    // rho_bar^2 times the innovation variance, as carried by psi.
    const double aging_var = s.psi - s.rho * s.rho * s.r - f.config.noise_w();
    const cx mz = split_sum[idx] / static_cast<double>(draws);
    EXPECT_NEAR(split_sq[idx] / draws - std::norm(mz), aging_var, 0.03 * aging_var) << "common " << idx;
  }
  for (int k = 0; k < num_ues; ++k) {
    const ScalarStats& s = d.dl.priv[k];
    EXPECT_NEAR(mse_p[k] / draws, s.r_tilde, 0.03 * s.r_tilde) << "private " << k;
    EXPECT_LT(std::abs(orth_p[k] / static_cast<double>(draws)), 0.02 * s.r) << "private " << k;
    cx expected{};
    for (const cx& mean : d.dl.private_means[k]) expected += s.rho * mean;
    // Sampling error of a mean scales with the observation spread, not the mean.
    const double allowed = std::max(0.03 * std::abs(expected), 4.0 * std::sqrt(s.psi / draws));
    EXPECT_LT(std::abs(pilot_sum[k] / static_cast<double>(draws) - expected), allowed)
        << "private pilot mean " << k;
  }
}

TEST(DlOracle, MonteCarloRouteAgreesWithClosedForm) {
  DlFixture f(testing::small_config(5));
  const DropModel& d = f.model;
  const DlStatistics mc = dl_stats_monte_carlo(d.topology, d.ul, d.plan, d.aging, d.timing, f.config, 50000, 17);
  const StatsComparison cmp = compare_statistics(d.dl, mc, 0.05);
  EXPECT_LT(cmp.worst_ratio, 1.0) << cmp.worst_name;
  EXPECT_GT(cmp.worst_ratio, 0.0);
  EXPECT_THROW(dl_stats_monte_carlo(d.topology, d.ul, d.plan, d.aging, d.timing, f.config, 1, 17), ConfigError);
}

TEST(DlOracle, ComparisonFlagsBrokenStatistics) {
  DlFixture f(testing::small_config());
  DlStatistics broken = f.model.dl;
  broken.priv[2].r *= 1.1;
  const StatsComparison cmp = compare_statistics(f.model.dl, broken, 0.02);
  EXPECT_GT(cmp.worst_ratio, 1.0);
  EXPECT_NE(cmp.worst_name.find("UE 2"), std::string::npos);
  EXPECT_EQ(compare_statistics(f.model.dl, f.model.dl, 0.02).worst_ratio, 0.0);
}

}  // namespace
}  // namespace cfrsma
