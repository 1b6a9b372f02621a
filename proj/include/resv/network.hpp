#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "resv/distributions.hpp"

namespace resv {

enum class NodeKind { data_center, gateway, router, access_point };

const char* to_string(NodeKind kind);
NodeKind node_kind_from_string(const std::string& name);

struct Node {
  int id = 0;
  NodeKind kind = NodeKind::router;
  double x = 0.0;  // meters
  double y = 0.0;
  double budget = 0.0;  // transmission resource C_b (MHz), access points only
};

/// Directed wired link; the reverse direction is a separate link.
struct Link {
  int id = 0;
  int src = 0;
  int dst = 0;
  double capacity = 0.0;  // Mnats/s
};

/// Wireless hop from an access point to a user.
struct Downlink {
  int id = 0;
  int user = 0;
  int ap = 0;  // node id
  double mean_snr = 1.0;  // linear
};

/// Wired links from a data center to the serving AP, followed by one downlink.
struct Path {
  int id = 0;
  int user = 0;
  std::vector<int> links;
  int downlink = 0;
};

struct User {
  int id = 0;
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  DemandDistribution demand = DemandDistribution::point_mass(0.0);
  std::vector<int> paths;      // filled by Topology::build_index
  std::vector<int> downlinks;  // distinct downlinks among the paths
};

/// Network description. Ids are dense: element i of each vector has id i.
/// Call build_index() after editing the vectors; it validates every
/// structural invariant and throws StructuralError on the first violation.
struct Topology {
  std::vector<Node> nodes;
  std::vector<Link> links;
  std::vector<User> users;
  std::vector<Downlink> downlinks;
  std::vector<Path> paths;

  void build_index();

  const std::vector<int>& paths_on_link(int link) const { return link_paths_.at(link); }
  const std::vector<int>& downlinks_at(int ap) const { return ap_downlinks_.at(ap); }
  const std::vector<int>& paths_on_downlink(int w) const { return downlink_paths_.at(w); }
  const std::vector<int>& out_links(int node) const { return out_links_.at(node); }
  /// Node ids of access points in ascending order.
  const std::vector<int>& access_points() const { return aps_; }
  bool indexed() const { return indexed_; }

 private:
  std::vector<std::vector<int>> link_paths_;
  std::vector<std::vector<int>> ap_downlinks_;
  std::vector<std::vector<int>> downlink_paths_;
  std::vector<std::vector<int>> out_links_;
  std::vector<int> aps_;
  bool indexed_ = false;
};

/// r is indexed by path id, t by downlink id.
struct Reservation {
  std::vector<double> r;
  std::vector<double> t;

  static Reservation zeros(const Topology& topology);
  double user_total(const Topology& topology, int user) const;
  double downlink_rate(const Topology& topology, int downlink) const;
};

enum class ResourceKind { link, access_point, path_rate, downlink_resource };

struct Violation {
  ResourceKind kind;
  int id;
  double excess;  // amount beyond capacity, or magnitude of a negative entry
};

struct FeasibilityReport {
  std::vector<double> link_slack;  // C_l - load, by link id
  std::vector<double> ap_slack;    // C_b - allocated, by node id (0 for non-APs)
  std::vector<Violation> violations;
  bool feasible() const { return violations.empty(); }
};

/// Per-link and per-AP slack; a violation is anything beyond tol * capacity.
FeasibilityReport check_feasible(const Topology& topology, const Reservation& reservation,
                                 double tol = 1e-9);

/// One minimum-hop data-center-to-AP path for each of the user's first
/// n_paths downlinks (downlinks with .user == user, in id order), ties broken by the lexicographically
/// smallest link-id sequence. Returned paths carry id -1.
std::vector<Path> select_paths(const Topology& topology, int user, std::size_t n_paths);

}  // namespace resv
