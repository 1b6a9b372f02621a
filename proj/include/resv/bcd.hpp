#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "resv/distributions.hpp"
#include "resv/network.hpp"
#include "resv/parallel.hpp"
#include "resv/ran.hpp"
#include "resv/routing.hpp"

namespace resv {

/// Stochastic models attached to a topology.
struct Models {
  std::vector<DemandDistribution> demand;     // by user id
  std::vector<double> theta;                  // by user id
  std::vector<ChannelDistribution> channels;  // by downlink id

  /// Demands and weights from the users, rayleigh channels from the downlink SNRs.
  static Models from_topology(const Topology& topology);
  /// Same demands, deterministic channels with efficiency log2(1 + snr).
  static Models deterministic_from_topology(const Topology& topology);

  /// True when every channel is deterministic; mixed models are rejected.
  bool deterministic() const;
  void validate(const Topology& topology) const;
};

struct BcdConfig {
  RoutingConfig routing;
  RanConfig ran;
  // Stop when ||r^i - r^{i-1}||^2 + ||t^i - t^{i-1}||^2 < tolerance.
  double tolerance = 1e-4;
  std::size_t max_iterations = 50;
  // Paths of a user on one downlink are charged one outage of their summed rate.
  bool shared_downlink = false;
};

struct ObjectiveTerms {
  double expected_traffic = 0.0;  // sum_k E[min(r_k, d_k)]
  double expected_outage = 0.0;   // unweighted sum of outage terms
  double weighted_outage = 0.0;   // sum_k theta_k * outage_k
  double value() const { return expected_traffic - weighted_outage; }
};

/// Objective decomposition of a reservation (maximization form). Throws
/// StructuralError when the reservation fails check_feasible.
ObjectiveTerms objective_terms(const Topology& topology, const Reservation& reservation,
                               const Models& models, bool shared_downlink = false);

double objective(const Topology& topology, const Reservation& reservation, const Models& models,
                 bool shared_downlink = false);

/// Rows of the r-subproblem: one per wired link, a demand cap per user with
/// point-mass demand, and one budget row per AP in deterministic mode.
RoutingProblem r_problem(const Topology& topology, const Models& models);

/// Global curvature |P_k| sup f_k of user k's demand term, or kappa for
/// point-mass demands.
double demand_curvature(const User& user, const DemandDistribution& demand, const BcdConfig& config);

/// Separable quadratic model of the r-subproblem at `anchor` for resources t.
/// `curvature` gives the per-user coefficient of the demand term; empty
/// selects demand_curvature, which makes the model a global upper bound.
std::vector<CostPtr> r_surrogate(const Topology& topology, const Models& models,
                                 std::span<const double> t, std::span<const double> anchor,
                                 const BcdConfig& config, std::span<const double> curvature = {});

/// E_min(R0) - E_min(R) - (1 - F(R0)) (R0 - R) = integral of F - F(R0) from R0 to R:
/// the gap between the demand term and its linearization at R0.
double demand_bregman(const DemandDistribution& demand, double r0, double r);

struct RStepResult {
  std::vector<double> r;
  std::vector<double> mu;  // by row of r_problem
  std::size_t surrogate_iterations = 0;
  std::size_t routing_iterations = 0;
  std::size_t backtracks = 0;  // re-solves after a rejected curvature
};

/// Majorize-minimize over r with t fixed. Each user's curvature starts from a
/// local estimate and is raised (up to demand_curvature) until the model
/// bounds the demand term at the new iterate, so every accepted step descends.
/// Stops when ||r^{m+1} - r^m||_2 < routing.surrogate_tolerance.
RStepResult r_step(const Topology& topology, const Models& models, std::span<const double> t,
                   std::span<const double> start, const BcdConfig& config,
                   const std::vector<double>* warm_mu = nullptr, WorkerPool* pool = nullptr);

/// Charged rates per downlink for a RAN solve: the summed rate in shared
/// mode, one entry per path otherwise.
RanInput ran_input(const Topology& topology, const Models& models, std::span<const double> r,
                   bool shared_downlink);

struct BcdTrace {
  std::vector<double> objective;  // maximization form, after each iteration
  std::vector<double> expected_traffic;
  std::vector<double> expected_outage;
  std::vector<double> r_movement;  // ||r^i - r^{i-1}||_2
  std::vector<double> t_movement;
  std::vector<std::size_t> surrogate_iterations;
  std::vector<std::size_t> routing_iterations;
  std::vector<std::size_t> ran_iterations;
  std::vector<double> wall_seconds;  // not part of any deterministic output
};

struct BcdResult {
  Reservation reservation;
  BcdTrace trace;
  std::vector<double> mu;      // final r-step multipliers, by row
  std::vector<double> lambda;  // final AP multipliers, by node id
  std::size_t iterations = 0;
  bool converged = false;
};

/// Alternates r_step and ran_bsum from r = 0 and a uniform split of every AP
/// budget. On the iteration cap the best iterate is returned with
/// converged = false.
BcdResult bcd_solve(const Topology& topology, const Models& models, const BcdConfig& config,
                    WorkerPool* pool = nullptr);

struct BlockKkt {
  RoutingKkt r;
  double t = 0.0;
};

/// Residuals of both block subproblems at a BCD result.
BlockKkt bcd_kkt(const Topology& topology, const Models& models, const BcdConfig& config,
                 const BcdResult& result);

}  // namespace resv
