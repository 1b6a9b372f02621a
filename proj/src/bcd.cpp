#include "resv/bcd.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "resv/errors.hpp"
#include "resv/quadrature.hpp"

namespace resv {

namespace {

double distance2(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// g r + L/2 (r - a)^2 + theta * outage, where the outage is either exact,
// O(r, t), or the quadratic bound  z0 (r - a) + c/2 (r - a)^2  used when
// several paths share a downlink.
class RStepCost final : public PathCost {
 public:
  struct Outage {
    double theta = 0.0;
    const ChannelDistribution* channel = nullptr;
    double t = 0.0;
    bool linearized = false;
    double z0 = 0.0;
    double c = 0.0;
  };

  RStepCost(double g, double curvature, double anchor, Outage outage)
      : g_(g), l_(curvature), a_(anchor), o_(outage) {}

  double value(double r) const override {
    const double d = r - a_;
    double v = g_ * r + 0.5 * l_ * d * d;
    if (o_.theta > 0.0) {
      v += o_.theta * (o_.linearized ? o_.z0 * d + 0.5 * o_.c * d * d
                                     : expected_outage(std::max(r, 0.0), o_.t, *o_.channel));
    }
    return v;
  }

  double derivative(double r) const override {
    const double d = r - a_;
    double v = g_ + l_ * d;
    if (o_.theta > 0.0) {
      v += o_.theta * (o_.linearized ? o_.z0 + o_.c * d : o_.channel->cdf(r, o_.t));
    }
    return v;
  }

  bool strictly_convex() const override { return l_ > 0.0; }

 private:
  double g_;
  double l_;
  double a_;
  Outage o_;
};

std::vector<double> uniform_split(const Topology& topology) {
  std::vector<double> t(topology.downlinks.size(), 0.0);
  for (int b : topology.access_points()) {
    const auto& ids = topology.downlinks_at(b);
    for (int w : ids) t[w] = topology.nodes[b].budget / static_cast<double>(ids.size());
  }
  return t;
}

}  // namespace

Models Models::from_topology(const Topology& topology) {
  Models m;
  for (const auto& u : topology.users) {
    m.demand.push_back(u.demand);
    m.theta.push_back(u.theta);
  }
  for (const auto& w : topology.downlinks) m.channels.push_back(ChannelDistribution::rayleigh(w.mean_snr));
  return m;
}

Models Models::deterministic_from_topology(const Topology& topology) {
  Models m = from_topology(topology);
  for (std::size_t w = 0; w < m.channels.size(); ++w) {
    m.channels[w] = ChannelDistribution::deterministic(std::log2(1.0 + topology.downlinks[w].mean_snr));
  }
  return m;
}

bool Models::deterministic() const {
  std::size_t n = 0;
  for (const auto& c : channels) n += c.kind() == ChannelKind::deterministic;
  if (n != 0 && n != channels.size()) {
    throw ConfigError("channels must be either all rayleigh or all deterministic");
  }
  return n != 0;
}

void Models::validate(const Topology& topology) const {
  if (demand.size() != topology.users.size() || theta.size() != topology.users.size()) {
    throw ConfigError("models: one demand and one theta per user required");
  }
  if (channels.size() != topology.downlinks.size()) {
    throw ConfigError("models: one channel per downlink required");
  }
  for (double th : theta) {
    if (!(th >= 0.0) || !std::isfinite(th)) throw ConfigError("models: theta must be >= 0");
  }
  if (deterministic()) {
    for (const auto& c : channels) {
      if (!(c.spectral_efficiency() > 0.0)) {
        throw ConfigError("models: spectral efficiency must be positive");
      }
    }
  }
}

ObjectiveTerms objective_terms(const Topology& topology, const Reservation& res,
                               const Models& models, bool shared_downlink) {
  const FeasibilityReport rep = check_feasible(topology, res);
  if (!rep.feasible()) throw StructuralError("objective: reservation is infeasible");
  ObjectiveTerms terms;
  for (const auto& u : topology.users) {
    terms.expected_traffic += expected_min(res.user_total(topology, u.id), models.demand[u.id]);
  }
  if (shared_downlink) {
    for (const auto& w : topology.downlinks) {
      const double o = expected_outage(res.downlink_rate(topology, w.id), res.t[w.id],
                                       models.channels[w.id]);
      terms.expected_outage += o;
      terms.weighted_outage += models.theta[w.user] * o;
    }
  } else {
    for (const auto& p : topology.paths) {
      const double o = expected_outage(res.r[p.id], res.t[p.downlink], models.channels[p.downlink]);
      terms.expected_outage += o;
      terms.weighted_outage += models.theta[p.user] * o;
    }
  }
  return terms;
}

double objective(const Topology& topology, const Reservation& res, const Models& models,
                 bool shared_downlink) {
  return objective_terms(topology, res, models, shared_downlink).value();
}

RoutingProblem r_problem(const Topology& topology, const Models& models) {
  RoutingProblem problem = RoutingProblem::from_topology(topology);
  for (const auto& u : topology.users) {
    const auto& d = models.demand[u.id];
    if (d.kind() != DemandKind::point_mass) continue;
    ConstraintRow row;
    row.capacity = d.atom();
    row.flows = u.paths;
    row.coeff.assign(u.paths.size(), 1.0);
    problem.add_row(std::move(row));
  }
  if (models.deterministic()) {
    for (int b : topology.access_points()) {
      ConstraintRow row;
      row.capacity = topology.nodes[b].budget;
      for (int w : topology.downlinks_at(b)) {
        for (int p : topology.paths_on_downlink(w)) {
          row.flows.push_back(p);
          row.coeff.push_back(1.0 / models.channels[w].spectral_efficiency());
        }
      }
      if (!row.flows.empty()) problem.add_row(std::move(row));
    }
  }
  problem.finalize();
  return problem;
}

double demand_curvature(const User& user, const DemandDistribution& demand, const BcdConfig& config) {
  if (demand.kind() == DemandKind::point_mass) return config.routing.kappa;
  return static_cast<double>(user.paths.size()) * demand.sup_pdf();
}

double demand_bregman(const DemandDistribution& demand, double r0, double r) {
  if (r == r0) return 0.0;
  const double f0 = demand.cdf(r0);
  const double lo = std::min(r0, r);
  const double hi = std::max(r0, r);
  const double v = quad::integrate([&](double y) { return demand.cdf(y) - f0; }, lo, hi);
  return std::max(0.0, r > r0 ? v : -v);
}

std::vector<CostPtr> r_surrogate(const Topology& topology, const Models& models,
                                 std::span<const double> t, std::span<const double> anchor,
                                 const BcdConfig& config, std::span<const double> curvature) {
  const bool deterministic = models.deterministic();
  std::vector<CostPtr> costs(topology.paths.size());
  for (const auto& u : topology.users) {
    const auto& demand = models.demand[u.id];
    double total = 0.0;
    for (int p : u.paths) total += anchor[p];
    const double g = demand.kind() == DemandKind::point_mass ? -1.0 : -demand.survival(total);
    const double l = curvature.empty() ? demand_curvature(u, demand, config) : curvature[u.id];
    for (int p : u.paths) {
      const int w = topology.paths[p].downlink;
      RStepCost::Outage o;
      if (!deterministic && models.theta[u.id] > 0.0) {
        o.theta = models.theta[u.id];
        o.channel = &models.channels[w];
        o.t = t[w];
        const auto& sharing = topology.paths_on_downlink(w);
        if (config.shared_downlink && sharing.size() > 1) {
          double rw = 0.0;
          for (int q : sharing) rw += anchor[q];
          o.linearized = true;
          o.z0 = o.channel->cdf(rw, o.t);
          o.c = o.t > 0.0 ? static_cast<double>(sharing.size()) * o.channel->sup_pdf(o.t) : 0.0;
        }
      }
      costs[p] = std::make_shared<RStepCost>(g, l, anchor[p], o);
    }
  }
  return costs;
}

namespace {

// Minimization-form r-subproblem cost at fixed t.
double r_cost(const Topology& topology, const Models& models, std::span<const double> t,
              std::span<const double> r, bool shared_downlink) {
  double v = 0.0;
  for (const auto& u : topology.users) {
    double total = 0.0;
    for (int p : u.paths) total += r[p];
    v -= expected_min(total, models.demand[u.id]);
  }
  if (models.deterministic()) return v;
  if (shared_downlink) {
    for (const auto& w : topology.downlinks) {
      if (models.theta[w.user] == 0.0) continue;
      double rw = 0.0;
      for (int p : topology.paths_on_downlink(w.id)) rw += r[p];
      v += models.theta[w.user] * expected_outage(rw, t[w.id], models.channels[w.id]);
    }
  } else {
    for (const auto& p : topology.paths) {
      if (models.theta[p.user] == 0.0) continue;
      v += models.theta[p.user] * expected_outage(r[p.id], t[p.downlink], models.channels[p.downlink]);
    }
  }
  return v;
}

}  // namespace

RStepResult r_step(const Topology& topology, const Models& models, std::span<const double> t,
                   std::span<const double> start, const BcdConfig& config,
                   const std::vector<double>* warm_mu, WorkerPool* pool) {
  const RoutingProblem problem = r_problem(topology, models);
  const RoutingConfig& rc = config.routing;
  const std::size_t n_users = topology.users.size();

  std::vector<double> global(n_users);
  for (const auto& u : topology.users) global[u.id] = demand_curvature(u, models.demand[u.id], config);
  std::vector<double> accepted = global;
  std::vector<double> curv(n_users);

  RStepResult out;
  double movement = std::numeric_limits<double>::infinity();
  // x: best iterate so far; y: surrogate anchor, extrapolated from the last
  // two iterates and reset to x whenever a surrogate minimizer fails to
  // improve on x.
  std::vector<double> x(start.begin(), start.end());
  std::vector<double> y = x;
  double fx = r_cost(topology, models, t, x, config.shared_downlink);
  double tau = 1.0;
  std::vector<double> warm;
  if (warm_mu && warm_mu->size() == problem.rows.size()) warm = *warm_mu;

  for (std::size_t m = 1; m <= rc.max_surrogate_iterations; ++m) {
    for (const auto& u : topology.users) {
      const auto& d = models.demand[u.id];
      if (d.kind() == DemandKind::point_mass) {
        curv[u.id] = global[u.id];
        continue;
      }
      double total = 0.0;
      for (int p : u.paths) total += y[p];
      const double local = static_cast<double>(u.paths.size()) * d.pdf(total);
      curv[u.id] = std::min(global[u.id], std::max(local, 0.25 * accepted[u.id]));
    }

    RoutingResult res;
    for (;;) {
      const std::vector<CostPtr> costs = r_surrogate(topology, models, t, y, config, curv);
      RoutingOptions options;
      options.pool = pool;
      options.warm_mu = warm.empty() ? nullptr : &warm;
      res = route_separable(problem, costs, rc, options);
      out.routing_iterations += res.iterations;
      warm = res.mu;

      bool rejected = false;
      for (const auto& u : topology.users) {
        if (curv[u.id] >= global[u.id]) continue;
        double r0 = 0.0;
        double r1 = 0.0;
        double step2 = 0.0;
        for (int p : u.paths) {
          r0 += y[p];
          r1 += res.r[p];
          step2 += (res.r[p] - y[p]) * (res.r[p] - y[p]);
        }
        const double bound = 0.5 * curv[u.id] * step2;
        if (demand_bregman(models.demand[u.id], r0, r1) > bound * (1.0 + 1e-9) + 1e-15) {
          curv[u.id] = std::min(global[u.id], 4.0 * curv[u.id]);
          rejected = true;
        }
      }
      if (!rejected) break;
      ++out.backtracks;
    }
    accepted = curv;

    movement = distance2(res.r, y);
    out.surrogate_iterations = m;
    std::vector<double> z = std::move(res.r);
    const double fz = r_cost(topology, models, t, z, config.shared_downlink);
    const bool improved = fz <= fx + 1e-12 * (1.0 + std::abs(fx));
    std::vector<double> x_prev = x;
    if (improved) {
      x = z;
      fx = fz;
    }
    if (movement < rc.surrogate_tolerance) {
      out.r = std::move(x);
      out.mu = std::move(res.mu);
      return out;
    }
    if (improved) {
      const double next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tau * tau));
      const double beta = (tau - 1.0) / next;
      for (std::size_t p = 0; p < y.size(); ++p) y[p] = std::max(0.0, x[p] + beta * (x[p] - x_prev[p]));
      tau = next;
    } else {
      y = x;
      tau = 1.0;
    }
  }
  throw NonConvergenceError("r-step surrogate iterations did not converge", out.surrogate_iterations,
                            movement);
}

RanInput ran_input(const Topology& topology, const Models& models, std::span<const double> r,
                   bool shared_downlink) {
  RanInput in;
  for (const auto& w : topology.downlinks) {
    std::vector<double> rates;
    const auto& paths = topology.paths_on_downlink(w.id);
    if (shared_downlink) {
      double s = 0.0;
      for (int p : paths) s += r[p];
      if (!paths.empty()) rates.push_back(s);
    } else {
      for (int p : paths) rates.push_back(r[p]);
    }
    in.rates.push_back(std::move(rates));
    in.theta.push_back(models.theta[w.user]);
    in.channels.push_back(models.channels[w.id]);
  }
  return in;
}

BcdResult bcd_solve(const Topology& topology, const Models& models, const BcdConfig& config,
                    WorkerPool* pool) {
  models.validate(topology);
  BcdResult result;
  Reservation cur = Reservation::zeros(topology);
  cur.t = uniform_split(topology);
  Reservation best = cur;
  double best_value = -std::numeric_limits<double>::infinity();
  std::vector<double> warm_mu;
  std::vector<double> lambda(topology.nodes.size(), 0.0);
  std::vector<double> best_mu;
  std::vector<double> best_lambda = lambda;

  for (std::size_t i = 1; i <= config.max_iterations; ++i) {
    const auto clock = std::chrono::steady_clock::now();
    RStepResult rs = r_step(topology, models, cur.t, cur.r, config,
                            warm_mu.empty() ? nullptr : &warm_mu, pool);
    const RanInput in = ran_input(topology, models, rs.r, config.shared_downlink);
    RanResult ran = ran_bsum(topology, in, cur.t, config.ran, pool);

    const double dr = distance2(rs.r, cur.r);
    const double dt = distance2(ran.t, cur.t);
    cur.r = std::move(rs.r);
    cur.t = std::move(ran.t);
    warm_mu = std::move(rs.mu);
    lambda = std::move(ran.lambda);

    const ObjectiveTerms terms = objective_terms(topology, cur, models, config.shared_downlink);
    auto& tr = result.trace;
    tr.objective.push_back(terms.value());
    tr.expected_traffic.push_back(terms.expected_traffic);
    tr.expected_outage.push_back(terms.expected_outage);
    tr.r_movement.push_back(dr);
    tr.t_movement.push_back(dt);
    tr.surrogate_iterations.push_back(rs.surrogate_iterations);
    tr.routing_iterations.push_back(rs.routing_iterations);
    tr.ran_iterations.push_back(ran.iterations);
    tr.wall_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - clock).count());
    result.iterations = i;

    if (terms.value() > best_value) {
      best_value = terms.value();
      best = cur;
      best_mu = warm_mu;
      best_lambda = lambda;
    }
    if (dr * dr + dt * dt < config.tolerance) {
      result.converged = true;
      break;
    }
  }

  if (result.converged) {
    result.reservation = std::move(cur);
    result.mu = std::move(warm_mu);
    result.lambda = std::move(lambda);
  } else {
    result.reservation = std::move(best);
    result.mu = std::move(best_mu);
    result.lambda = std::move(best_lambda);
  }
  return result;
}

BlockKkt bcd_kkt(const Topology& topology, const Models& models, const BcdConfig& config,
                 const BcdResult& result) {
  const Reservation& res = result.reservation;
  BlockKkt kkt;
  const RoutingProblem problem = r_problem(topology, models);
  // The surrogate matches the true gradient at its anchor.
  const std::vector<CostPtr> costs = r_surrogate(topology, models, res.t, res.r, config);
  kkt.r = routing_kkt(problem, costs, res.r, result.mu);
  if (!models.deterministic()) {
    kkt.t = ran_stationarity(topology, ran_input(topology, models, res.r, config.shared_downlink),
                             res.t, result.lambda);
  }
  return kkt;
}

}  // namespace resv
