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

#include "cfrsma/topology.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>

#include "cfrsma/linalg.hpp"

namespace cfrsma {

namespace {

double wrapped_axis_delta(double from, double to, double side) {
  double d = to - from;
  d -= side * std::round(d / side);
  return d;
}

double planar_wrap_distance(Point a, Point b, double side) {
  const Point d = wrap_displacement(a, b, side);
  return std::hypot(d.x, d.y);
}

// Circular mean of coordinates on [0, side).
double torus_mean(const std::vector<double>& coords, double side) {
  double s = 0.0;
  double c = 0.0;
  double plain = 0.0;
  for (double x : coords) {
    const double a = 2.0 * kPi * x / side;
    s += std::sin(a);
    c += std::cos(a);
    plain += x;
  }
  if (std::hypot(s, c) < 1e-12 * static_cast<double>(coords.size())) return plain / coords.size();
  double a = std::atan2(s, c);
  if (a < 0.0) a += 2.0 * kPi;
  return a * side / (2.0 * kPi);
}

// Greedy nearest-first assignment with cluster sizes floor(K/L) or ceil(K/L).
std::vector<int> balanced_assignment(const std::vector<Point>& ue_pos, const std::vector<Point>& centroids,
                                     double side) {
  const int num_ues = static_cast<int>(ue_pos.size());
  const int num_clusters = static_cast<int>(centroids.size());
  std::vector<std::tuple<double, int, int>> pairs;
  pairs.reserve(static_cast<std::size_t>(num_ues) * num_clusters);
  for (int k = 0; k < num_ues; ++k) {
    for (int l = 0; l < num_clusters; ++l) {
      pairs.emplace_back(planar_wrap_distance(ue_pos[k], centroids[l], side), k, l);
    }
  }
  std::sort(pairs.begin(), pairs.end());

  const int floor_size = num_ues / num_clusters;
  const int extra = num_ues % num_clusters;
  int extra_used = 0;
  std::vector<int> count(num_clusters, 0);
  std::vector<int> assignment(num_ues, -1);
  for (const auto& [d, k, l] : pairs) {
    if (assignment[k] >= 0) continue;
    if (count[l] < floor_size) {
      assignment[k] = l;
      ++count[l];
    } else if (count[l] == floor_size && extra_used < extra) {
      assignment[k] = l;
      ++count[l];
      ++extra_used;
    }
  }
  return assignment;
}

}  // namespace

Point wrap_displacement(Point from, Point to, double area_side) {
  return {wrapped_axis_delta(from.x, to.x, area_side), wrapped_axis_delta(from.y, to.y, area_side)};
}

double wraparound_distance(Point a, Point b, double area_side, double ap_height) {
  double dx = std::fabs(a.x - b.x);
  double dy = std::fabs(a.y - b.y);
  dx = std::min(dx, std::fabs(area_side - dx));
  dy = std::min(dy, std::fabs(area_side - dy));
  return std::sqrt(dx * dx + dy * dy + ap_height * ap_height);
}

LargeScale large_scale(double distance_m, const PathLossModel& path_loss, const RicianModel& rician) {
  const double beta_db = path_loss.intercept_db - path_loss.slope_db * std::log10(distance_m);
  return {db_to_linear(beta_db), std::pow(10.0, rician.intercept - rician.slope * distance_m)};
}

arma::cx_mat spatial_correlation(double angle_rad, double asd_deg, int antennas) {
  const double sigma = asd_deg * kPi / 180.0;
  const double s = std::sin(angle_rad);
  const double c = std::cos(angle_rad);
  arma::cx_mat r(antennas, antennas);
  for (int m = 0; m < antennas; ++m) {
    for (int n = 0; n < antennas; ++n) {
      const double d = static_cast<double>(m - n);
      const double spread = sigma * kPi * d * c;
      r(m, n) = std::polar(std::exp(-0.5 * spread * spread), kPi * d * s);
    }
  }
  return psd_repair(r);
}

arma::cx_vec los_steering(double angle_rad, int antennas) {
  arma::cx_vec a(antennas);
  const double s = std::sin(angle_rad);
  for (int n = 0; n < antennas; ++n) a(n) = std::polar(1.0, kPi * n * s);
  return a;
}

Clustering cluster_network(const std::vector<Point>& ap_pos, const std::vector<Point>& ue_pos, int num_clusters,
                           const SimConfig& config, Engine& rng) {
  const int num_aps = static_cast<int>(ap_pos.size());
  const int num_ues = static_cast<int>(ue_pos.size());
  const double side = config.area_side_m;
  if (num_clusters < 1 || num_clusters > num_aps || num_clusters > num_ues) {
    throw ConfigError("clustering needs 1 <= L <= min(M, K); got L = " + std::to_string(num_clusters));
  }

  // Farthest-point initialization.
  std::vector<Point> centroids;
  std::uniform_int_distribution<int> pick(0, num_ues - 1);
  centroids.push_back(ue_pos[pick(rng)]);
  std::vector<double> nearest(num_ues, std::numeric_limits<double>::infinity());
  while (static_cast<int>(centroids.size()) < num_clusters) {
    int far = 0;
    for (int k = 0; k < num_ues; ++k) {
      nearest[k] = std::min(nearest[k], planar_wrap_distance(ue_pos[k], centroids.back(), side));
      if (nearest[k] > nearest[far]) far = k;
    }
    centroids.push_back(ue_pos[far]);
  }

  std::vector<int> ue_cluster;
  for (int iter = 0; iter < 100; ++iter) {
    std::vector<int> next = balanced_assignment(ue_pos, centroids, side);
    if (next == ue_cluster) break;
    ue_cluster = std::move(next);
    for (int l = 0; l < num_clusters; ++l) {
      std::vector<double> xs;
      std::vector<double> ys;
      for (int k = 0; k < num_ues; ++k) {
        if (ue_cluster[k] != l) continue;
        xs.push_back(ue_pos[k].x);
        ys.push_back(ue_pos[k].y);
      }
      if (!xs.empty()) centroids[l] = {torus_mean(xs, side), torus_mean(ys, side)};
    }
  }

  // score(m, l) = sum of path gains from AP m to the UEs of cluster l
  std::vector<double> score(static_cast<std::size_t>(num_aps) * num_clusters, 0.0);
  for (int m = 0; m < num_aps; ++m) {
    for (int k = 0; k < num_ues; ++k) {
      const double d = wraparound_distance(ap_pos[m], ue_pos[k], side, config.ap_height_m);
      score[m * num_clusters + ue_cluster[k]] += large_scale(d, config.path_loss, config.rician).beta;
    }
  }
  std::vector<int> ap_cluster(num_aps);
  std::vector<int> ap_count(num_clusters, 0);
  for (int m = 0; m < num_aps; ++m) {
    const auto* row = &score[m * num_clusters];
    ap_cluster[m] = static_cast<int>(std::max_element(row, row + num_clusters) - row);
    ++ap_count[ap_cluster[m]];
  }
  for (int l = 0; l < num_clusters; ++l) {
    if (ap_count[l] > 0) continue;
    int donor = -1;
    for (int m = 0; m < num_aps; ++m) {
      if (ap_count[ap_cluster[m]] < 2) continue;
      if (donor < 0 || score[m * num_clusters + l] > score[donor * num_clusters + l]) donor = m;
    }
    if (donor < 0) throw ConfigError("clustering left cluster " + std::to_string(l) + " without APs");
    --ap_count[ap_cluster[donor]];
    ap_cluster[donor] = l;
    ++ap_count[l];
  }

  for (int l = 0; l < num_clusters; ++l) {
    if (std::count(ue_cluster.begin(), ue_cluster.end(), l) == 0) {
      throw ConfigError("clustering left cluster " + std::to_string(l) + " without UEs");
    }
  }
  return {std::move(ap_cluster), std::move(ue_cluster)};
}

PilotAssignment assign_pilots(const std::vector<std::vector<int>>& ues_in_cluster, int tau_u, Engine& rng) {
  int num_ues = 0;
  for (const auto& members : ues_in_cluster) num_ues += static_cast<int>(members.size());

  PilotAssignment out;
  out.pilot_index.assign(num_ues, 0);
  for (std::size_t l = 0; l < ues_in_cluster.size(); ++l) {
    std::vector<int> order = ues_in_cluster[l];
    if (static_cast<int>(order.size()) > tau_u) {
      throw ConfigError("pilot capacity exceeded: cluster " + std::to_string(l) + " has " +
                        std::to_string(order.size()) + " UEs but tau_u = " + std::to_string(tau_u));
    }
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t s = 0; s < order.size(); ++s) out.pilot_index[order[s]] = static_cast<int>(s) + 1;
  }
  out.pilot_sets.resize(num_ues);
  for (int k = 0; k < num_ues; ++k) {
    for (int i = 0; i < num_ues; ++i) {
      if (out.pilot_index[i] == out.pilot_index[k]) out.pilot_sets[k].push_back(i);
    }
  }
  return out;
}

void Topology::set_link_statistics(int m, int k, const arma::cx_mat& r, const arma::cx_vec& mean) {
  const int p = pair(m, k);
  r_corr[p] = r;
  h_bar[p] = mean;
  r_bar[p] = mean * mean.t() + r;
  r_sqrt[p] = hermitian_sqrt(r);
}

Topology build_topology(const SimConfig& config, std::vector<Point> ap_pos, std::vector<Point> ue_pos,
                        const Clustering& clustering, const PilotAssignment& pilots, int tau_u) {
  Topology t;
  t.num_aps = static_cast<int>(ap_pos.size());
  t.num_ues = static_cast<int>(ue_pos.size());
  t.num_clusters = 1 + *std::max_element(clustering.cluster_of_ue.begin(), clustering.cluster_of_ue.end());
  t.antennas = config.antennas_per_ap;
  t.tau_u = tau_u;
  t.ap_pos = std::move(ap_pos);
  t.ue_pos = std::move(ue_pos);
  t.cluster_of_ap = clustering.cluster_of_ap;
  t.cluster_of_ue = clustering.cluster_of_ue;
  t.aps_in_cluster.resize(t.num_clusters);
  t.ues_in_cluster.resize(t.num_clusters);
  for (int m = 0; m < t.num_aps; ++m) t.aps_in_cluster.at(t.cluster_of_ap[m]).push_back(m);
  for (int k = 0; k < t.num_ues; ++k) t.ues_in_cluster.at(t.cluster_of_ue[k]).push_back(k);

  const int n = t.antennas;
  const std::size_t pairs = static_cast<std::size_t>(t.num_aps) * t.num_ues;
  t.beta.resize(pairs);
  t.rician_k.resize(pairs);
  t.angle.resize(pairs);
  t.r_corr.resize(pairs);
  t.h_bar.resize(pairs);
  t.r_bar.resize(pairs);
  t.r_sqrt.resize(pairs);
  for (int m = 0; m < t.num_aps; ++m) {
    for (int k = 0; k < t.num_ues; ++k) {
      const int p = t.pair(m, k);
      const double d = wraparound_distance(t.ap_pos[m], t.ue_pos[k], config.area_side_m, config.ap_height_m);
      const LargeScale ls = large_scale(d, config.path_loss, config.rician);
      const Point disp = wrap_displacement(t.ap_pos[m], t.ue_pos[k], config.area_side_m);
      t.beta[p] = ls.beta;
      t.rician_k[p] = ls.rician_k;
      t.angle[p] = std::atan2(disp.y, disp.x);

      const double nlos = ls.beta / (1.0 + ls.rician_k);
      const double los = ls.rician_k * ls.beta / (1.0 + ls.rician_k);
      const arma::cx_mat normalized = spatial_correlation(t.angle[p], config.asd_deg, n);
      t.r_corr[p] = nlos * normalized;
      t.h_bar[p] = std::sqrt(los) * los_steering(t.angle[p], n);
      t.r_bar[p] = t.h_bar[p] * t.h_bar[p].t() + t.r_corr[p];
      t.r_sqrt[p] = std::sqrt(nlos) * hermitian_sqrt(normalized);
    }
  }

  t.pilot_index = pilots.pilot_index;
  t.pilot_sets = pilots.pilot_sets;
  t.ues_in_slot.assign(tau_u, {});
  for (int k = 0; k < t.num_ues; ++k) t.ues_in_slot.at(t.pilot_index[k] - 1).push_back(k);
  return t;
}

Topology drop_network(const SimConfig& config, std::uint64_t drop) {
  validate(config);
  const Timing timing = resolve_timing(config);

  Engine pos_rng = make_engine(config.seed, {drop, tag(Stream::kPositions)});
  std::uniform_real_distribution<double> coord(0.0, config.area_side_m);
  std::vector<Point> ap_pos(config.num_aps);
  std::vector<Point> ue_pos(config.num_ues);
  for (auto& p : ap_pos) p = {coord(pos_rng), coord(pos_rng)};
  for (auto& p : ue_pos) p = {coord(pos_rng), coord(pos_rng)};

  Engine cluster_rng = make_engine(config.seed, {drop, tag(Stream::kClustering)});
  const Clustering clustering = cluster_network(ap_pos, ue_pos, config.num_clusters, config, cluster_rng);

  std::vector<std::vector<int>> ues_in_cluster(config.num_clusters);
  for (int k = 0; k < config.num_ues; ++k) ues_in_cluster[clustering.cluster_of_ue[k]].push_back(k);
  Engine pilot_rng = make_engine(config.seed, {drop, tag(Stream::kPilots)});
  const PilotAssignment pilots = assign_pilots(ues_in_cluster, timing.tau_u, pilot_rng);

  return build_topology(config, std::move(ap_pos), std::move(ue_pos), clustering, pilots, timing.tau_u);
}

}  // namespace cfrsma
