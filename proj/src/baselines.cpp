#include "resv/baselines.hpp"

#include <tuple>

namespace resv {

RestrictedTopology restrict_to_single_path(const Topology& topology) {
  RestrictedTopology out;
  Topology& t = out.topology;
  t.nodes = topology.nodes;
  t.links = topology.links;
  for (const auto& u : topology.users) {
    int best = u.paths.front();
    auto key = [&](int p) {
      const Path& path = topology.paths[p];
      return std::make_tuple(-topology.downlinks[path.downlink].mean_snr, path.links.size(), p);
    };
    for (int p : u.paths) {
      if (key(p) < key(best)) best = p;
    }
    User user = u;
    user.paths.clear();
    user.downlinks.clear();
    t.users.push_back(std::move(user));

    Downlink w = topology.downlinks[topology.paths[best].downlink];
    out.downlink_origin.push_back(w.id);
    w.id = static_cast<int>(t.downlinks.size());
    t.downlinks.push_back(w);

    Path path = topology.paths[best];
    out.path_origin.push_back(path.id);
    path.id = static_cast<int>(t.paths.size());
    path.downlink = w.id;
    t.paths.push_back(std::move(path));
  }
  t.build_index();
  return out;
}

Models restrict_models(const RestrictedTopology& restricted, const Models& models) {
  Models m;
  m.demand = models.demand;
  m.theta = models.theta;
  for (int w : restricted.downlink_origin) m.channels.push_back(models.channels.at(w));
  return m;
}

BcdResult single_path_solve(const Topology& topology, const Models& models,
                            const BcdConfig& config, WorkerPool* pool) {
  models.validate(topology);
  const RestrictedTopology restricted = restrict_to_single_path(topology);
  BcdResult res = bcd_solve(restricted.topology, restrict_models(restricted, models), config, pool);
  Reservation full = Reservation::zeros(topology);
  for (std::size_t p = 0; p < restricted.path_origin.size(); ++p) {
    full.r[restricted.path_origin[p]] = res.reservation.r[p];
  }
  for (std::size_t w = 0; w < restricted.downlink_origin.size(); ++w) {
    full.t[restricted.downlink_origin[w]] = res.reservation.t[w];
  }
  res.reservation = std::move(full);
  return res;
}

Models average_models(const Models& models) {
  Models m;
  m.theta = models.theta;
  for (const auto& d : models.demand) m.demand.push_back(DemandDistribution::point_mass(d.mean()));
  for (const auto& c : models.channels) {
    m.channels.push_back(ChannelDistribution::deterministic(c.mean_rate_per_resource()));
  }
  return m;
}

BcdResult average_based_solve(const Topology& topology, const Models& models,
                              const BcdConfig& config, WorkerPool* pool) {
  models.validate(topology);
  return bcd_solve(topology, average_models(models), config, pool);
}

}  // namespace resv
