#pragma once

#include <string>
#include <vector>

#include "resv/bcd.hpp"

namespace resv {

enum class BaselineKind { single_path, average_based };

/// The topology with each user restricted to one path: the one whose
/// downlink has the highest mean SNR, then fewest hops, then lowest id.
/// Unused downlinks are dropped and ids renumbered densely.
struct RestrictedTopology {
  Topology topology;
  std::vector<int> path_origin;      // restricted path id -> original path id
  std::vector<int> downlink_origin;  // restricted downlink id -> original downlink id
};

RestrictedTopology restrict_to_single_path(const Topology& topology);

/// Models of the restricted topology, taken from the full-topology models.
Models restrict_models(const RestrictedTopology& restricted, const Models& models);

/// bcd_solve on the single-path restriction. The reservation is mapped back to
/// the full topology with zero rates and resources on the unused entries;
/// mu and lambda refer to the restricted problem.
BcdResult single_path_solve(const Topology& topology, const Models& models,
                            const BcdConfig& config, WorkerPool* pool = nullptr);

/// Point-mass demands at the means and deterministic channels with the mean
/// achievable rate per resource.
Models average_models(const Models& models);

/// bcd_solve on average_models on the same path sets.
BcdResult average_based_solve(const Topology& topology, const Models& models,
                              const BcdConfig& config, WorkerPool* pool = nullptr);

}  // namespace resv
