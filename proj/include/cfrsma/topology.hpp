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

#pragma once

#include <armadillo>
#include <cstdint>
#include <vector>

#include "cfrsma/config.hpp"
#include "cfrsma/rng.hpp"
#include "cfrsma/types.hpp"

namespace cfrsma {

struct LargeScale {
  double beta = 0.0;      // linear path gain
  double rician_k = 0.0;  // linear LoS-to-NLoS ratio
};

/// Shortest displacement from `from` to `to` on the wrapped square.
Point wrap_displacement(Point from, Point to, double area_side);

/// Shortest distance over the nine shifted copies of `b`, with the AP height
/// added in quadrature.
double wraparound_distance(Point a, Point b, double area_side, double ap_height = 10.0);

LargeScale large_scale(double distance_m, const PathLossModel& path_loss = {}, const RicianModel& rician = {});

/// Gaussian local scattering around `angle_rad` for a half-wavelength ULA.
/// Unit diagonal, Hermitian, PSD.
arma::cx_mat spatial_correlation(double angle_rad, double asd_deg, int antennas);

/// exp(j pi n sin(angle)), n = 0..N-1
arma::cx_vec los_steering(double angle_rad, int antennas);

struct Clustering {
  std::vector<int> cluster_of_ap;
  std::vector<int> cluster_of_ue;
};

/// Balanced k-means on UE positions, then each AP joins the cluster with the
/// largest aggregate path gain towards its UEs. Clusters left without APs take
/// the best donor AP from a cluster that can spare one.
Clustering cluster_network(const std::vector<Point>& ap_pos, const std::vector<Point>& ue_pos, int num_clusters,
                           const SimConfig& config, Engine& rng);

struct PilotAssignment {
  std::vector<int> pilot_index;              // per UE, 1..tau_u
  std::vector<std::vector<int>> pilot_sets;  // P_k, sorted, always contains k
};

/// Orthogonal slots inside each cluster (random order), reused across clusters.
PilotAssignment assign_pilots(const std::vector<std::vector<int>>& ues_in_cluster, int tau_u, Engine& rng);

/// One network drop: geometry, clusters, large-scale statistics and pilots.
/// Pair-indexed arrays use pair(m, k) = m * K + k.
struct Topology {
  int num_aps = 0;
  int num_ues = 0;
  int num_clusters = 0;
  int antennas = 0;
  int tau_u = 0;

  std::vector<Point> ap_pos;
  std::vector<Point> ue_pos;

  std::vector<int> cluster_of_ap;
  std::vector<int> cluster_of_ue;
  std::vector<std::vector<int>> aps_in_cluster;  // A_l
  std::vector<std::vector<int>> ues_in_cluster;  // K_l

  std::vector<double> beta;
  std::vector<double> rician_k;
  std::vector<double> angle;
  std::vector<arma::cx_mat> r_corr;  // R_mk (NLoS covariance)
  std::vector<arma::cx_vec> h_bar;   // LoS mean
  std::vector<arma::cx_mat> r_bar;   // h_bar h_bar^H + R
  std::vector<arma::cx_mat> r_sqrt;  // R^{1/2}

  std::vector<int> pilot_index;
  std::vector<std::vector<int>> pilot_sets;
  std::vector<std::vector<int>> ues_in_slot;  // index slot - 1

  int pair(int m, int k) const { return m * num_ues + k; }
  bool serves(int m, int k) const { return cluster_of_ap[m] == cluster_of_ue[k]; }

  /// Replaces the statistics of one link and refreshes the derived matrices.
  void set_link_statistics(int m, int k, const arma::cx_mat& r, const arma::cx_vec& mean);
};

/// Builds a topology from fixed positions and assignments (used by drop_network and tests).
Topology build_topology(const SimConfig& config, std::vector<Point> ap_pos, std::vector<Point> ue_pos,
                        const Clustering& clustering, const PilotAssignment& pilots, int tau_u);

/// Random drop, deterministic in (config.seed, drop).
Topology drop_network(const SimConfig& config, std::uint64_t drop);

}  // namespace cfrsma
