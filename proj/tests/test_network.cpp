#include <doctest.h>

#include <array>

#include "resv/errors.hpp"
#include "resv/network.hpp"
#include "resv/topology_gen.hpp"
#include "resv/topology_io.hpp"
#include "support.hpp"

using namespace resv;

namespace {

// Two users each with one path over the same link of capacity 2.
Topology shared_link() {
  const std::array<double, 1> budgets{10.0};
  Topology t = testing::star(budgets, 2.0);
  const std::array<int, 1> aps{1};
  const std::array<double, 1> snr{10.0};
  testing::add_user(t, aps, snr, DemandDistribution::lognormal(0.0, 1.0), 0.5);
  testing::add_user(t, aps, snr, DemandDistribution::lognormal(0.0, 1.0), 0.5);
  t.build_index();
  return t;
}

User plain_user(int id) {
  User u;
  u.id = id;
  return u;
}

}  // namespace

TEST_SUITE("network") {
  TEST_CASE("zero reservation is feasible with full slack") {
    const Topology t = shared_link();
    const FeasibilityReport rep = check_feasible(t, Reservation::zeros(t));
    CHECK(rep.feasible());
    CHECK(rep.link_slack[0] == 2.0);
    CHECK(rep.ap_slack[1] == 10.0);
    CHECK(rep.ap_slack[0] == 0.0);
  }

  TEST_CASE("link filled exactly to capacity") {
    const Topology t = shared_link();
    Reservation res = Reservation::zeros(t);
    res.r = {1.0, 1.0};
    const FeasibilityReport rep = check_feasible(t, res);
    CHECK(rep.feasible());
    CHECK(rep.link_slack[0] == doctest::Approx(0.0));
  }

  TEST_CASE("overloaded link reports its excess") {
    const Topology t = shared_link();
    Reservation res = Reservation::zeros(t);
    res.r = {1.1, 1.1};
    const FeasibilityReport rep = check_feasible(t, res);
    REQUIRE(rep.violations.size() == 1);
    CHECK(rep.violations[0].kind == ResourceKind::link);
    CHECK(rep.violations[0].id == 0);
    CHECK(rep.violations[0].excess == doctest::Approx(0.2).epsilon(1e-12));
  }

  TEST_CASE("negative entries and AP overuse are violations") {
    const Topology t = shared_link();
    Reservation res = Reservation::zeros(t);
    res.r = {-0.5, 0.0};
    res.t = {6.0, 6.0};
    const FeasibilityReport rep = check_feasible(t, res);
    bool negative = false, ap = false;
    for (const auto& v : rep.violations) {
      negative |= v.kind == ResourceKind::path_rate && v.id == 0;
      ap |= v.kind == ResourceKind::access_point && v.id == 1 && std::abs(v.excess - 2.0) < 1e-12;
    }
    CHECK(negative);
    CHECK(ap);
  }

  TEST_CASE("user totals and downlink rates") {
    const Topology t = shared_link();
    Reservation res = Reservation::zeros(t);
    res.r = {0.25, 0.5};
    CHECK(res.user_total(t, 1) == 0.5);
    CHECK(res.downlink_rate(t, 0) == 0.25);
  }

  TEST_CASE("structural errors") {
    Topology t = shared_link();
    SUBCASE("unknown link on a path") {
      t.paths[0].links = {7};
      CHECK_THROWS_AS(t.build_index(), StructuralError);
    }
    SUBCASE("non-dense ids") {
      t.users[1].id = 5;
      CHECK_THROWS_AS(t.build_index(), StructuralError);
    }
    SUBCASE("path ending at another AP") {
      t.nodes.push_back(Node{2, NodeKind::access_point, 0.0, 0.0, 5.0});
      t.links.push_back(Link{1, 0, 2, 1.0});
      t.paths[0].links = {1};
      CHECK_THROWS_AS(t.build_index(), StructuralError);
    }
    SUBCASE("non-positive capacity") {
      t.links[0].capacity = 0.0;
      CHECK_THROWS_AS(t.build_index(), StructuralError);
    }
    SUBCASE("reservation of the wrong size") {
      Reservation res;
      res.r = {0.0};
      res.t = {0.0, 0.0};
      CHECK_THROWS_AS(check_feasible(t, res), StructuralError);
    }
  }

  TEST_CASE("select_paths on a line graph") {
    Topology t;
    t.nodes = {Node{0, NodeKind::data_center}, Node{1, NodeKind::router},
               Node{2, NodeKind::access_point, 0.0, 0.0, 10.0}};
    t.links = {Link{0, 0, 1, 5.0}, Link{1, 1, 2, 5.0}};
    t.users = {plain_user(0)};
    t.downlinks = {Downlink{0, 0, 2, 3.0}};
    const auto paths = select_paths(t, 0, 1);
    REQUIRE(paths.size() == 1);
    CHECK(paths[0].links == std::vector<int>{0, 1});
    CHECK(paths[0].downlink == 0);
    CHECK(paths[0].id == -1);
  }

  TEST_CASE("select_paths breaks hop ties by link ids") {
    Topology t;
    t.nodes = {Node{0, NodeKind::data_center}, Node{1, NodeKind::router}, Node{2, NodeKind::router},
               Node{3, NodeKind::access_point, 0.0, 0.0, 10.0}};
    // Route via router 2 uses links 0, 1; route via router 1 uses 2, 3.
    t.links = {Link{0, 0, 2, 5.0}, Link{1, 2, 3, 5.0}, Link{2, 0, 1, 5.0}, Link{3, 1, 3, 5.0}};
    t.users = {plain_user(0)};
    t.downlinks = {Downlink{0, 0, 3, 3.0}};
    const auto paths = select_paths(t, 0, 1);
    CHECK(paths.at(0).links == std::vector<int>{0, 1});
  }

  TEST_CASE("select_paths with too few reachable APs") {
    Topology t;
    t.nodes = {Node{0, NodeKind::data_center}, Node{1, NodeKind::access_point, 0.0, 0.0, 10.0},
               Node{2, NodeKind::access_point, 0.0, 0.0, 10.0}};
    t.links = {Link{0, 0, 1, 5.0}};
    t.users = {plain_user(0)};
    t.downlinks = {Downlink{0, 0, 1, 3.0}, Downlink{1, 0, 2, 3.0}};
    CHECK(select_paths(t, 0, 1).size() == 1);
    CHECK_THROWS_AS(select_paths(t, 0, 2), InfeasibleUserError);
  }

  TEST_CASE("full-size generator") {
    const Topology t = generate_paper_topology(0);
    std::size_t dc = 0, gw = 0, routers = 0, aps = 0;
    for (const auto& n : t.nodes) {
      dc += n.kind == NodeKind::data_center;
      gw += n.kind == NodeKind::gateway;
      routers += n.kind == NodeKind::router;
      aps += n.kind == NodeKind::access_point;
    }
    CHECK(dc == 1);
    CHECK(gw == 3);
    CHECK(routers == 11);
    CHECK(aps == 57);
    CHECK(t.links.size() == 324);
    CHECK(t.users.size() == 200);
    CHECK(t.paths.size() == 600);
    for (const auto& u : t.users) CHECK(u.paths.size() == 3);
    for (const auto& p : t.paths) {
      // Wired links end at the AP of the one wireless hop.
      CHECK(t.links[p.links.back()].dst == t.downlinks[p.downlink].ap);
      CHECK(t.nodes[t.links[p.links.front()].src].kind == NodeKind::data_center);
    }
    // Every link has a reverse twin of equal capacity.
    for (const auto& l : t.links) {
      bool twin = false;
      for (const auto& m : t.links) twin |= m.src == l.dst && m.dst == l.src && m.capacity == l.capacity;
      CHECK(twin);
    }
  }

  TEST_CASE("generator is deterministic in the seed") {
    const Json a = topology_to_json(generate_paper_topology(0));
    const Json b = topology_to_json(generate_paper_topology(0));
    const Json c = topology_to_json(generate_paper_topology(1));
    CHECK(a.dump() == b.dump());
    CHECK(a.dump() != c.dump());
  }

  TEST_CASE("topology JSON round trip") {
    const Topology t = generate_topology(GeneratorParams::desk_scale(), 3);
    const Topology back = topology_from_json(topology_to_json(t));
    CHECK(topology_to_json(back).dump() == topology_to_json(t).dump());
  }

  TEST_CASE("topology JSON schema errors") {
    Json doc = topology_to_json(shared_link());
    SUBCASE("wrong schema") {
      doc["schema"] = "other/1";
      CHECK_THROWS_AS(topology_from_json(doc), ConfigError);
    }
    SUBCASE("missing field") {
      doc["links"][0].erase("capacity");
      CHECK_THROWS_AS(topology_from_json(doc), ConfigError);
    }
    SUBCASE("structural problem") {
      doc["paths"][0]["links"] = Json::array({3});
      CHECK_THROWS_AS(topology_from_json(doc), StructuralError);
    }
  }
}
