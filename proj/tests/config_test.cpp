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

#include "cfrsma/config.hpp"

namespace cfrsma {
namespace {

SimConfig clustered(int k, int l, Mode mode) {
  SimConfig c;
  c.num_ues = k;
  c.num_clusters = l;
  c.mode = mode;
  return c;
}

TEST(Config, DefaultsAreValid) {
  SimConfig c;
  EXPECT_NO_THROW(validate(c));
  EXPECT_DOUBLE_EQ(c.p_max_w(), 1.0);
  EXPECT_NEAR(c.noise_w(), 3.981071705534973e-13, 1e-25);
}

TEST(Config, TimingWithDlPilots) {
  const Timing t = resolve_timing(clustered(16, 4, Mode::kRsmaDlPilots));
  EXPECT_EQ(t.tau_u, 4);
  EXPECT_EQ(t.tau_dc, 4);
  EXPECT_EQ(t.tau_dp, 4);
  EXPECT_EQ(t.lambda(), 13);
  EXPECT_EQ(t.ul_instant(3), 3);
  EXPECT_EQ(t.dl_common_instant(0), 5);
  EXPECT_EQ(t.dl_common_instant(3), 8);
  EXPECT_EQ(t.dl_private_instant(1), 9);
  EXPECT_EQ(t.dl_private_instant(4), 12);
  EXPECT_EQ(t.num_data_instants(), 88);
}

TEST(Config, TimingWithoutDlPilots) {
  const Timing t = resolve_timing(clustered(16, 4, Mode::kRsmaNoDlPilots));
  EXPECT_EQ(t.tau_d(), 0);
  EXPECT_EQ(t.lambda(), 5);
}

TEST(Config, SdmaTrainsOnlyPrivateChannels) {
  SimConfig c = clustered(16, 4, Mode::kSdma);
  EXPECT_DOUBLE_EQ(c.effective_power_split(), 1.0);
  EXPECT_FALSE(c.has_common_stream());
  const Timing t = resolve_timing(c);
  EXPECT_EQ(t.tau_dc, 0);
  EXPECT_EQ(t.tau_dp, 4);
  EXPECT_EQ(t.lambda(), 9);
}

TEST(Config, UnbalancedClustersNeedLargerPilotBudget) {
  EXPECT_EQ(max_cluster_size(10, 4), 3);
  EXPECT_EQ(max_cluster_size(8, 8), 1);
  SimConfig c = clustered(10, 4, Mode::kRsmaDlPilots);
  c.tau_u = 2;
  EXPECT_THROW(resolve_timing(c), ConfigError);
}

TEST(Config, RejectsInvalidValues) {
  SimConfig c;
  c.num_clusters = 17;
  EXPECT_THROW(validate(c), ConfigError);
  c = SimConfig{};
  c.power_split = 1.5;
  EXPECT_THROW(validate(c), ConfigError);
  c = SimConfig{};
  c.drops = 0;
  EXPECT_THROW(validate(c), ConfigError);
  c = SimConfig{};
  c.velocity_kmh = {10.0, 20.0};
  EXPECT_THROW(validate(c), ConfigError);
  c = SimConfig{};
  c.tau_c = 12;
  EXPECT_THROW(resolve_timing(c), ConfigError);
}

TEST(Config, PilotOverridesMustMatchMode) {
  SimConfig c = clustered(16, 4, Mode::kRsmaNoDlPilots);
  c.tau_dp = 4;
  EXPECT_THROW(resolve_timing(c), ConfigError);
  c = clustered(16, 4, Mode::kRsmaDlPilots);
  c.tau_dp = 2;
  EXPECT_THROW(resolve_timing(c), ConfigError);
}

TEST(Config, ModeNamesRoundTrip) {
  for (Mode m : {Mode::kRsmaDlPilots, Mode::kRsmaNoDlPilots, Mode::kSdma}) {
    EXPECT_EQ(mode_from_string(to_string(m)), m);
  }
  EXPECT_THROW(mode_from_string("noma"), ConfigError);
}

TEST(Config, TextRoundTripPreservesHash) {
  SimConfig c;
  c.num_aps = 32;
  c.velocity_kmh = {10.0, 20.5, 30.25, 40.0};
  c.num_ues = 4;
  c.num_clusters = 2;
  c.tau_u = 3;
  c.noise_dbm = -93.7;
  c.seed = 123456789012345ull;
  c.mode = Mode::kSdma;
  const std::string text = to_key_value_text(c);
  const SimConfig back = parse_config(text);
  EXPECT_EQ(to_key_value_text(back), text);
  EXPECT_EQ(config_hash(back), config_hash(c));
  c.seed += 1;
  EXPECT_NE(config_hash(back), config_hash(c));
}

TEST(Config, ParserErrors) {
  EXPECT_THROW(parse_config("num_aps = 4\n"), ConfigError);
  EXPECT_THROW(parse_config("schema_version = 2\n"), ConfigError);
  EXPECT_THROW(parse_config("schema_version = 1\nbogus = 3\n"), ConfigError);
  EXPECT_THROW(parse_config("schema_version = 1\nnum_aps = 4\nnum_aps = 5\n"), ConfigError);
  EXPECT_THROW(parse_config("schema_version = 1\nnum_aps = four\n"), ConfigError);
  EXPECT_THROW(parse_config("schema_version = 1\nnum_aps\n"), ConfigError);
  EXPECT_THROW(load_config_file("/nonexistent/config.txt"), ConfigError);
}

TEST(Config, ParserAcceptsCommentsAndLists) {
  const SimConfig c = parse_config(
      "# comment\n\nschema_version = 1\nnum_ues = 4  \nnum_clusters = 2\nvelocity_kmh = 10, 20, 30, 40\n"
      "mode = rsma_no_dl_pilots\n");
  EXPECT_EQ(c.num_ues, 4);
  ASSERT_EQ(c.velocity_kmh.size(), 4u);
  EXPECT_DOUBLE_EQ(c.velocity_of(2), 30.0);
  EXPECT_EQ(c.mode, Mode::kRsmaNoDlPilots);
}

}  // namespace
}  // namespace cfrsma
