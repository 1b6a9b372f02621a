#include "resv/network.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "resv/errors.hpp"

namespace resv {

namespace {

[[noreturn]] void fail(const std::string& what) { throw StructuralError(what); }

template <class T>
void check_dense_ids(const std::vector<T>& items, const char* what) {
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].id != static_cast<int>(i)) {
      fail(std::string(what) + " ids must be dense: element " + std::to_string(i) + " has id " +
           std::to_string(items[i].id));
    }
  }
}

bool valid_index(int id, std::size_t size) { return id >= 0 && static_cast<std::size_t>(id) < size; }

}  // namespace

const char* to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::data_center: return "data-center";
    case NodeKind::gateway: return "gateway";
    case NodeKind::router: return "router";
    case NodeKind::access_point: return "access-point";
  }
  return "unknown";
}

NodeKind node_kind_from_string(const std::string& name) {
  if (name == "data-center") return NodeKind::data_center;
  if (name == "gateway") return NodeKind::gateway;
  if (name == "router") return NodeKind::router;
  if (name == "access-point") return NodeKind::access_point;
  fail("unknown node kind '" + name + "'");
}

void Topology::build_index() {
  indexed_ = false;
  check_dense_ids(nodes, "node");
  check_dense_ids(links, "link");
  check_dense_ids(users, "user");
  check_dense_ids(downlinks, "downlink");
  check_dense_ids(paths, "path");

  aps_.clear();
  for (const auto& n : nodes) {
    if (n.kind == NodeKind::access_point) {
      if (!(n.budget >= 0.0) || !std::isfinite(n.budget)) {
        fail("access point " + std::to_string(n.id) + " has an invalid budget");
      }
      aps_.push_back(n.id);
    }
  }

  out_links_.assign(nodes.size(), {});
  for (const auto& l : links) {
    if (!valid_index(l.src, nodes.size()) || !valid_index(l.dst, nodes.size())) {
      fail("link " + std::to_string(l.id) + " references an unknown node");
    }
    if (l.src == l.dst) fail("link " + std::to_string(l.id) + " is a self-loop");
    if (!(l.capacity > 0.0) || !std::isfinite(l.capacity)) {
      fail("link " + std::to_string(l.id) + " needs a positive finite capacity");
    }
    out_links_[l.src].push_back(l.id);
  }

  for (const auto& u : users) {
    if (!(u.theta >= 0.0) || !std::isfinite(u.theta)) {
      fail("user " + std::to_string(u.id) + " has an invalid theta");
    }
  }

  ap_downlinks_.assign(nodes.size(), {});
  for (const auto& w : downlinks) {
    if (!valid_index(w.user, users.size())) {
      fail("downlink " + std::to_string(w.id) + " references an unknown user");
    }
    if (!valid_index(w.ap, nodes.size()) || nodes[w.ap].kind != NodeKind::access_point) {
      fail("downlink " + std::to_string(w.id) + " must start at an access point");
    }
    if (!(w.mean_snr > 0.0) || !std::isfinite(w.mean_snr)) {
      fail("downlink " + std::to_string(w.id) + " needs a positive mean SNR");
    }
    ap_downlinks_[w.ap].push_back(w.id);
  }

  link_paths_.assign(links.size(), {});
  downlink_paths_.assign(downlinks.size(), {});
  for (auto& u : users) {
    u.paths.clear();
    u.downlinks.clear();
  }
  for (const auto& p : paths) {
    const std::string tag = "path " + std::to_string(p.id);
    if (!valid_index(p.user, users.size())) fail(tag + " references an unknown user");
    if (!valid_index(p.downlink, downlinks.size())) fail(tag + " references an unknown downlink");
    const Downlink& w = downlinks[p.downlink];
    if (w.user != p.user) fail(tag + " ends on a downlink of another user");
    if (p.links.empty()) fail(tag + " has no wired links");
    int at = -1;
    for (std::size_t i = 0; i < p.links.size(); ++i) {
      const int lid = p.links[i];
      if (!valid_index(lid, links.size())) fail(tag + " references an unknown link");
      const Link& l = links[lid];
      if (i == 0) {
        if (nodes[l.src].kind != NodeKind::data_center) fail(tag + " must start at a data center");
      } else if (l.src != at) {
        fail(tag + " is not a connected walk");
      }
      at = l.dst;
    }
    if (at != w.ap) fail(tag + " does not end at its downlink's access point");
    std::vector<int> sorted = p.links;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      fail(tag + " uses a link twice");
    }
    for (int lid : p.links) link_paths_[lid].push_back(p.id);
    downlink_paths_[p.downlink].push_back(p.id);
    users[p.user].paths.push_back(p.id);
    users[p.user].downlinks.push_back(p.downlink);
  }
  for (auto& u : users) {
    if (u.paths.empty()) fail("user " + std::to_string(u.id) + " has no candidate path");
    std::sort(u.downlinks.begin(), u.downlinks.end());
    u.downlinks.erase(std::unique(u.downlinks.begin(), u.downlinks.end()), u.downlinks.end());
  }
  indexed_ = true;
}

Reservation Reservation::zeros(const Topology& topology) {
  return {std::vector<double>(topology.paths.size(), 0.0),
          std::vector<double>(topology.downlinks.size(), 0.0)};
}

double Reservation::user_total(const Topology& topology, int user) const {
  double s = 0.0;
  for (int p : topology.users.at(user).paths) s += r.at(p);
  return s;
}

double Reservation::downlink_rate(const Topology& topology, int downlink) const {
  double s = 0.0;
  for (int p : topology.paths_on_downlink(downlink)) s += r.at(p);
  return s;
}

FeasibilityReport check_feasible(const Topology& topology, const Reservation& reservation,
                                 double tol) {
  if (!topology.indexed()) fail("topology is not indexed");
  if (reservation.r.size() != topology.paths.size()) {
    fail("reservation has " + std::to_string(reservation.r.size()) + " path rates for " +
         std::to_string(topology.paths.size()) + " paths");
  }
  if (reservation.t.size() != topology.downlinks.size()) {
    fail("reservation has " + std::to_string(reservation.t.size()) + " downlink resources for " +
         std::to_string(topology.downlinks.size()) + " downlinks");
  }

  FeasibilityReport report;
  for (std::size_t p = 0; p < reservation.r.size(); ++p) {
    if (!(reservation.r[p] >= 0.0)) {
      report.violations.push_back({ResourceKind::path_rate, static_cast<int>(p),
                                   std::isnan(reservation.r[p])
                                       ? std::numeric_limits<double>::infinity()
                                       : -reservation.r[p]});
    }
  }
  for (std::size_t w = 0; w < reservation.t.size(); ++w) {
    if (!(reservation.t[w] >= 0.0)) {
      report.violations.push_back({ResourceKind::downlink_resource, static_cast<int>(w),
                                   std::isnan(reservation.t[w])
                                       ? std::numeric_limits<double>::infinity()
                                       : -reservation.t[w]});
    }
  }

  report.link_slack.resize(topology.links.size());
  for (const auto& l : topology.links) {
    double load = 0.0;
    for (int p : topology.paths_on_link(l.id)) load += reservation.r[p];
    report.link_slack[l.id] = l.capacity - load;
    if (load - l.capacity > tol * l.capacity) {
      report.violations.push_back({ResourceKind::link, l.id, load - l.capacity});
    }
  }

  report.ap_slack.assign(topology.nodes.size(), 0.0);
  for (int b : topology.access_points()) {
    const double budget = topology.nodes[b].budget;
    double used = 0.0;
    for (int w : topology.downlinks_at(b)) used += reservation.t[w];
    report.ap_slack[b] = budget - used;
    if (used - budget > tol * budget) {
      report.violations.push_back({ResourceKind::access_point, b, used - budget});
    }
  }
  return report;
}

std::vector<Path> select_paths(const Topology& topology, int user, std::size_t n_paths) {
  if (n_paths < 1) throw std::invalid_argument("select_paths: n_paths must be at least 1");
  if (!valid_index(user, topology.users.size())) fail("select_paths: unknown user");

  std::vector<std::vector<int>> out(topology.nodes.size());
  std::vector<std::vector<int>> in(topology.nodes.size());
  for (const auto& l : topology.links) {
    out.at(l.src).push_back(l.id);
    in.at(l.dst).push_back(l.id);
  }
  for (auto& v : out) std::sort(v.begin(), v.end());

  std::vector<int> candidates;
  for (const auto& w : topology.downlinks) {
    if (w.user == user) candidates.push_back(w.id);
  }

  std::vector<Path> result;
  for (int wid : candidates) {
    if (result.size() == n_paths) break;
    const int target = topology.downlinks[wid].ap;

    // Hop distance to the target along directed links (reverse BFS).
    constexpr int kUnreached = std::numeric_limits<int>::max();
    std::vector<int> dist(topology.nodes.size(), kUnreached);
    std::deque<int> queue{target};
    dist[target] = 0;
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      for (int lid : in[v]) {
        const int u = topology.links[lid].src;
        if (dist[u] == kUnreached) {
          dist[u] = dist[v] + 1;
          queue.push_back(u);
        }
      }
    }

    int hops = kUnreached;
    for (const auto& n : topology.nodes) {
      if (n.kind == NodeKind::data_center && n.id != target) hops = std::min(hops, dist[n.id]);
    }
    if (hops == kUnreached) continue;

    // Greedy construction yields the lexicographically smallest shortest walk:
    // the first link is the smallest id leaving any data center at distance
    // `hops`, and each following link the smallest id that stays on a
    // shortest route.
    Path path;
    path.id = -1;
    path.user = user;
    path.downlink = wid;
    int best = -1;
    for (const auto& l : topology.links) {
      const auto& src = topology.nodes[l.src];
      if (src.kind == NodeKind::data_center && dist[l.src] == hops && dist[l.dst] == hops - 1) {
        best = l.id;
        break;  // links are scanned in id order
      }
    }
    path.links.push_back(best);
    int at = topology.links[best].dst;
    while (at != target) {
      int next = -1;
      for (int lid : out[at]) {
        if (dist[topology.links[lid].dst] == dist[at] - 1) {
          next = lid;
          break;
        }
      }
      path.links.push_back(next);
      at = topology.links[next].dst;
    }
    result.push_back(std::move(path));
  }

  if (result.empty()) {
    throw InfeasibleUserError("user " + std::to_string(user) +
                              " cannot be reached from any data center");
  }
  if (result.size() < n_paths) {
    throw InfeasibleUserError("user " + std::to_string(user) + " has only " +
                              std::to_string(result.size()) + " reachable access points, " +
                              std::to_string(n_paths) + " paths requested");
  }
  return result;
}

}  // namespace resv
