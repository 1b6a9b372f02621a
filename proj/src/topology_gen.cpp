#include "resv/topology_gen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <utility>

#include "resv/errors.hpp"

namespace resv {

namespace {

struct Point {
  double x;
  double y;
};

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct PhysicalLink {
  int a;  // end closer to the data center
  int b;
  double capacity;
};

std::vector<Point> jittered_grid(const GeneratorParams& p, std::mt19937_64& rng) {
  const std::size_t n = p.access_points;
  const auto cols = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(double(n))));
  const std::size_t rows = (n + cols - 1) / cols;
  const double cw = p.plane_size / double(cols);
  const double ch = p.plane_size / double(rows);

  std::vector<std::size_t> cells(cols * rows);
  std::iota(cells.begin(), cells.end(), 0);
  std::shuffle(cells.begin(), cells.end(), rng);
  cells.resize(n);
  std::sort(cells.begin(), cells.end());

  std::uniform_real_distribution<double> jitter(-p.grid_jitter, p.grid_jitter);
  std::vector<Point> out;
  out.reserve(n);
  for (std::size_t c : cells) {
    const double cx = (double(c % cols) + 0.5 + jitter(rng)) * cw;
    const double cy = (double(c / cols) + 0.5 + jitter(rng)) * ch;
    out.push_back({cx, cy});
  }
  return out;
}

// Lloyd iterations seeded with k distinct points; returns centers and labels.
std::pair<std::vector<Point>, std::vector<std::size_t>> kmeans(const std::vector<Point>& pts,
                                                               std::size_t k,
                                                               std::mt19937_64& rng) {
  std::vector<std::size_t> order(pts.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Point> centers;
  for (std::size_t i = 0; i < k; ++i) centers.push_back(pts[order[i]]);

  std::vector<std::size_t> label(pts.size(), 0);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < k; ++c) {
        if (distance(pts[i], centers[c]) < distance(pts[i], centers[best])) best = c;
      }
      if (iter == 0 || best != label[i]) changed = true;
      label[i] = best;
    }
    std::vector<Point> sum(k, {0.0, 0.0});
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      sum[label[i]].x += pts[i].x;
      sum[label[i]].y += pts[i].y;
      ++count[label[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (count[c] > 0) centers[c] = {sum[c].x / double(count[c]), sum[c].y / double(count[c])};
    }
    if (!changed) break;
  }
  return {centers, label};
}

}  // namespace

GeneratorParams GeneratorParams::paper_scale() { return {}; }

GeneratorParams GeneratorParams::desk_scale() {
  GeneratorParams p;
  p.access_points = 12;
  p.routers = 4;
  p.users = 40;
  p.extra_ap_links = 12;
  p.plane_size = 1500.0;
  return p;
}

double mean_snr_at(const GeneratorParams& params, double d) {
  const double dist = std::max(d, 1.0);
  double db = params.snr_reference_db -
              10.0 * params.path_loss_exponent * std::log10(dist / params.reference_distance);
  db = std::clamp(db, params.snr_min_db, params.snr_max_db);
  return std::pow(10.0, db / 10.0);
}

Topology generate_paper_topology(std::uint64_t seed) {
  return generate_topology(GeneratorParams::paper_scale(), seed);
}

Topology generate_topology(const GeneratorParams& p, std::uint64_t seed) {
  if (p.access_points == 0 || p.routers == 0 || p.gateways == 0 || p.users == 0) {
    throw std::invalid_argument("generator: every node class needs at least one member");
  }
  if (p.routers > p.access_points) {
    throw std::invalid_argument("generator: more routers than access points");
  }
  if (p.paths_per_user > p.access_points) {
    throw std::invalid_argument("generator: more paths per user than access points");
  }

  std::mt19937_64 rng(seed);
  Topology topo;

  // Node ids: data center, gateways, routers, access points.
  const Point center{p.plane_size / 2.0, p.plane_size / 2.0};
  const std::vector<Point> ap_pos = jittered_grid(p, rng);
  auto [router_pos, ap_cluster] = kmeans(ap_pos, p.routers, rng);

  std::vector<std::size_t> ring(p.routers);
  std::iota(ring.begin(), ring.end(), 0);
  std::stable_sort(ring.begin(), ring.end(), [&](std::size_t a, std::size_t b) {
    return std::atan2(router_pos[a].y - center.y, router_pos[a].x - center.x) <
           std::atan2(router_pos[b].y - center.y, router_pos[b].x - center.x);
  });
  // Routers renumbered in ring order.
  std::vector<std::size_t> ring_rank(p.routers);
  for (std::size_t i = 0; i < ring.size(); ++i) ring_rank[ring[i]] = i;

  const std::size_t n_gw = std::min(p.gateways, p.routers);
  std::vector<std::size_t> router_group(p.routers);
  std::vector<Point> gw_pos(n_gw, {0.0, 0.0});
  std::vector<std::size_t> gw_count(n_gw, 0);
  for (std::size_t i = 0; i < p.routers; ++i) {
    const std::size_t g = i * n_gw / p.routers;
    router_group[i] = g;
    gw_pos[g].x += router_pos[ring[i]].x;
    gw_pos[g].y += router_pos[ring[i]].y;
    ++gw_count[g];
  }
  for (std::size_t g = 0; g < n_gw; ++g) {
    gw_pos[g] = {gw_pos[g].x / double(gw_count[g]), gw_pos[g].y / double(gw_count[g])};
  }

  auto add_node = [&](NodeKind kind, Point pos, double budget) {
    Node n;
    n.id = static_cast<int>(topo.nodes.size());
    n.kind = kind;
    n.x = pos.x;
    n.y = pos.y;
    n.budget = budget;
    topo.nodes.push_back(n);
    return n.id;
  };
  const int dc = add_node(NodeKind::data_center, center, 0.0);
  std::vector<int> gw_id;
  for (std::size_t g = 0; g < n_gw; ++g) gw_id.push_back(add_node(NodeKind::gateway, gw_pos[g], 0.0));
  std::vector<int> router_id;
  for (std::size_t i = 0; i < p.routers; ++i) {
    router_id.push_back(add_node(NodeKind::router, router_pos[ring[i]], 0.0));
  }
  std::vector<int> ap_id;
  for (const auto& pos : ap_pos) ap_id.push_back(add_node(NodeKind::access_point, pos, p.ap_budget));

  std::vector<PhysicalLink> phys;
  for (int g : gw_id) phys.push_back({dc, g, p.backbone_capacity});
  for (std::size_t i = 0; i < p.routers; ++i) {
    phys.push_back({gw_id[router_group[i]], router_id[i], p.router_capacity});
  }
  if (p.routers == 2) {
    phys.push_back({router_id[0], router_id[1], p.router_capacity});
  } else if (p.routers > 2) {
    for (std::size_t i = 0; i < p.routers; ++i) {
      phys.push_back({router_id[i], router_id[(i + 1) % p.routers], p.router_capacity});
    }
  }

  // Per-cluster AP trees, attached nearest-first to the closest of the router
  // and the already attached APs that still have depth headroom.
  std::vector<std::size_t> depth(p.access_points, 0);
  for (std::size_t c = 0; c < p.routers; ++c) {
    const Point rp = router_pos[c];
    std::vector<std::size_t> members;
    for (std::size_t a = 0; a < p.access_points; ++a) {
      if (ap_cluster[a] == c) members.push_back(a);
    }
    std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      return distance(ap_pos[a], rp) < distance(ap_pos[b], rp);
    });
    std::vector<std::size_t> attached;
    for (std::size_t a : members) {
      int parent = router_id[ring_rank[c]];
      double best = distance(ap_pos[a], rp);
      std::size_t parent_depth = 0;
      for (std::size_t q : attached) {
        const double d = distance(ap_pos[a], ap_pos[q]);
        if (depth[q] < p.max_tree_depth && d < best) {
          best = d;
          parent = ap_id[q];
          parent_depth = depth[q];
        }
      }
      depth[a] = parent_depth + 1;
      const std::size_t tier = std::min<std::size_t>(depth[a], 4) - 1;
      phys.push_back({parent, ap_id[a], p.tier_capacity[tier]});
      attached.push_back(a);
    }
  }

  // Extra AP-AP links between the nearest pairs not yet adjacent.
  std::set<std::pair<int, int>> adjacent;
  for (const auto& l : phys) adjacent.insert({std::min(l.a, l.b), std::max(l.a, l.b)});
  struct Candidate {
    double d;
    std::size_t a;
    std::size_t b;
  };
  std::vector<Candidate> cand;
  for (std::size_t a = 0; a < p.access_points; ++a) {
    for (std::size_t b = a + 1; b < p.access_points; ++b) {
      if (!adjacent.count({ap_id[a], ap_id[b]})) cand.push_back({distance(ap_pos[a], ap_pos[b]), a, b});
    }
  }
  std::stable_sort(cand.begin(), cand.end(),
                   [](const Candidate& x, const Candidate& y) { return x.d < y.d; });
  const std::size_t n_extra = std::min(p.extra_ap_links, cand.size());
  for (std::size_t i = 0; i < n_extra; ++i) {
    const auto& c = cand[i];
    const std::size_t tier = std::clamp<std::size_t>(std::max(depth[c.a], depth[c.b]), 2, 4) - 1;
    const bool a_upper = depth[c.a] <= depth[c.b];
    phys.push_back({a_upper ? ap_id[c.a] : ap_id[c.b], a_upper ? ap_id[c.b] : ap_id[c.a],
                    p.tier_capacity[tier]});
  }

  for (const auto& l : phys) {
    Link down{static_cast<int>(topo.links.size()), l.a, l.b, l.capacity};
    topo.links.push_back(down);
    Link up{static_cast<int>(topo.links.size()), l.b, l.a, l.capacity};
    topo.links.push_back(up);
  }

  // Users and their associations to the strongest access points.
  std::uniform_real_distribution<double> coord(0.0, p.plane_size);
  std::normal_distribution<double> eta(p.eta_mean, p.eta_spread);
  for (std::size_t k = 0; k < p.users; ++k) {
    User u;
    u.id = static_cast<int>(k);
    u.x = coord(rng);
    u.y = coord(rng);
    u.theta = p.theta;
    u.demand = DemandDistribution::lognormal(eta(rng), p.sigma);
    topo.users.push_back(u);

    std::vector<std::pair<double, std::size_t>> power;
    for (std::size_t a = 0; a < p.access_points; ++a) {
      power.push_back({mean_snr_at(p, distance({u.x, u.y}, ap_pos[a])), a});
    }
    std::stable_sort(power.begin(), power.end(),
                     [](const auto& x, const auto& y) { return x.first > y.first; });
    for (std::size_t i = 0; i < p.paths_per_user; ++i) {
      Downlink w;
      w.id = static_cast<int>(topo.downlinks.size());
      w.user = u.id;
      w.ap = ap_id[power[i].second];
      w.mean_snr = power[i].first;
      topo.downlinks.push_back(w);
    }
  }

  for (std::size_t k = 0; k < p.users; ++k) {
    for (Path& path : select_paths(topo, static_cast<int>(k), p.paths_per_user)) {
      path.id = static_cast<int>(topo.paths.size());
      topo.paths.push_back(std::move(path));
    }
  }
  topo.build_index();
  return topo;
}

}  // namespace resv
