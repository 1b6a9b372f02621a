#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include "resv/network.hpp"

namespace resv {

/// Layout and model parameters of the synthetic two-tier network.
struct GeneratorParams {
  std::size_t access_points = 57;
  std::size_t routers = 11;
  std::size_t gateways = 3;
  std::size_t users = 200;
  std::size_t paths_per_user = 3;
  // AP-AP links added on top of the spanning structure, nearest pairs first.
  std::size_t extra_ap_links = 80;

  double plane_size = 3000.0;  // square side, meters
  double grid_jitter = 0.3;    // fraction of a grid cell

  double backbone_capacity = 4000.0;  // data center to gateways
  double router_capacity = 2000.0;    // gateway-router and router ring
  // Indexed by hop distance of the far AP from its router: 1, 2, 3, 4+.
  std::array<double, 4> tier_capacity{2000.0, 400.0, 320.0, 160.0};
  std::size_t max_tree_depth = 4;

  double ap_budget = 40.0;  // MHz

  double snr_reference_db = 30.0;  // mean SNR at the reference distance
  double reference_distance = 100.0;
  double path_loss_exponent = 3.5;
  double snr_min_db = -5.0;
  double snr_max_db = 45.0;

  double eta_mean = 2.0;    // per-user eta ~ Normal(eta_mean, eta_spread)
  double eta_spread = 0.3;
  double sigma = 0.6;
  double theta = 0.5;

  /// 57 APs, 11 routers, 3 gateways, 200 users, 162 physical links.
  static GeneratorParams paper_scale();
  /// 12 APs, 4 routers, 40 users.
  static GeneratorParams desk_scale();
};

/// Deterministic for a fixed (params, seed).
Topology generate_topology(const GeneratorParams& params, std::uint64_t seed);

/// generate_topology(GeneratorParams::paper_scale(), seed).
Topology generate_paper_topology(std::uint64_t seed);

/// Mean SNR (linear) at the given distance under the log-distance model.
double mean_snr_at(const GeneratorParams& params, double distance);

}  // namespace resv
