#include "resv/topology_io.hpp"

#include <fstream>
#include <sstream>

#include "resv/errors.hpp"

namespace resv {

namespace {

[[noreturn]] void schema_error(const std::string& what) {
  throw ConfigError("topology: " + what);
}

const Json& field(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) schema_error(where + " must be an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(where + " is missing '" + key + "'");
  return *it;
}

double number(const Json& obj, const char* key, const std::string& where) {
  const Json& v = field(obj, key, where);
  if (!v.is_number()) schema_error(where + "." + key + " must be a number");
  return v.get<double>();
}

int integer(const Json& obj, const char* key, const std::string& where) {
  const Json& v = field(obj, key, where);
  if (!v.is_number_integer()) schema_error(where + "." + key + " must be an integer");
  return v.get<int>();
}

std::string text(const Json& obj, const char* key, const std::string& where) {
  const Json& v = field(obj, key, where);
  if (!v.is_string()) schema_error(where + "." + key + " must be a string");
  return v.get<std::string>();
}

const Json& array(const Json& obj, const char* key) {
  const Json& v = field(obj, key, "document");
  if (!v.is_array()) schema_error(std::string("'") + key + "' must be an array");
  return v;
}

Json demand_to_json(const DemandDistribution& d) {
  switch (d.kind()) {
    case DemandKind::lognormal:
      return {{"kind", "lognormal"}, {"eta", d.eta()}, {"sigma", d.sigma()}};
    case DemandKind::point_mass:
      return {{"kind", "point-mass"}, {"value", d.atom()}};
    case DemandKind::empirical:
      break;
  }
  throw ConfigError("topology: empirical demands cannot be serialized");
}

DemandDistribution demand_from_json(const Json& j, const std::string& where) {
  const std::string kind = text(j, "kind", where);
  try {
    if (kind == "lognormal") {
      return DemandDistribution::lognormal(number(j, "eta", where), number(j, "sigma", where));
    }
    if (kind == "point-mass") return DemandDistribution::point_mass(number(j, "value", where));
  } catch (const std::invalid_argument& e) {
    schema_error(where + ": " + e.what());
  }
  schema_error(where + ".kind must be 'lognormal' or 'point-mass'");
}

}  // namespace

Json topology_to_json(const Topology& t) {
  Json doc;
  doc["schema"] = kTopologySchema;
  Json nodes = Json::array();
  for (const auto& n : t.nodes) {
    Json j{{"id", n.id}, {"kind", to_string(n.kind)}, {"x", n.x}, {"y", n.y}};
    if (n.kind == NodeKind::access_point) j["budget"] = n.budget;
    nodes.push_back(std::move(j));
  }
  Json links = Json::array();
  for (const auto& l : t.links) {
    links.push_back({{"id", l.id}, {"src", l.src}, {"dst", l.dst}, {"capacity", l.capacity}});
  }
  Json users = Json::array();
  for (const auto& u : t.users) {
    users.push_back({{"id", u.id},
                     {"x", u.x},
                     {"y", u.y},
                     {"theta", u.theta},
                     {"demand", demand_to_json(u.demand)}});
  }
  Json downlinks = Json::array();
  for (const auto& w : t.downlinks) {
    downlinks.push_back({{"id", w.id}, {"user", w.user}, {"ap", w.ap}, {"mean_snr", w.mean_snr}});
  }
  Json paths = Json::array();
  for (const auto& p : t.paths) {
    paths.push_back({{"id", p.id}, {"user", p.user}, {"links", p.links}, {"downlink", p.downlink}});
  }
  doc["nodes"] = std::move(nodes);
  doc["links"] = std::move(links);
  doc["users"] = std::move(users);
  doc["downlinks"] = std::move(downlinks);
  doc["paths"] = std::move(paths);
  return doc;
}

Topology topology_from_json(const Json& doc) {
  if (!doc.is_object()) schema_error("document must be an object");
  if (text(doc, "schema", "document") != kTopologySchema) {
    schema_error(std::string("unsupported schema, expected '") + kTopologySchema + "'");
  }
  Topology t;
  for (const auto& j : array(doc, "nodes")) {
    const std::string where = "nodes[" + std::to_string(t.nodes.size()) + "]";
    Node n;
    n.id = integer(j, "id", where);
    try {
      n.kind = node_kind_from_string(text(j, "kind", where));
    } catch (const StructuralError& e) {
      schema_error(where + ": " + e.what());
    }
    n.x = number(j, "x", where);
    n.y = number(j, "y", where);
    if (n.kind == NodeKind::access_point) n.budget = number(j, "budget", where);
    t.nodes.push_back(n);
  }
  for (const auto& j : array(doc, "links")) {
    const std::string where = "links[" + std::to_string(t.links.size()) + "]";
    t.links.push_back({integer(j, "id", where), integer(j, "src", where), integer(j, "dst", where),
                       number(j, "capacity", where)});
  }
  for (const auto& j : array(doc, "users")) {
    const std::string where = "users[" + std::to_string(t.users.size()) + "]";
    User u;
    u.id = integer(j, "id", where);
    u.x = number(j, "x", where);
    u.y = number(j, "y", where);
    u.theta = number(j, "theta", where);
    u.demand = demand_from_json(field(j, "demand", where), where + ".demand");
    t.users.push_back(std::move(u));
  }
  for (const auto& j : array(doc, "downlinks")) {
    const std::string where = "downlinks[" + std::to_string(t.downlinks.size()) + "]";
    t.downlinks.push_back({integer(j, "id", where), integer(j, "user", where),
                           integer(j, "ap", where), number(j, "mean_snr", where)});
  }
  for (const auto& j : array(doc, "paths")) {
    const std::string where = "paths[" + std::to_string(t.paths.size()) + "]";
    Path p;
    p.id = integer(j, "id", where);
    p.user = integer(j, "user", where);
    p.downlink = integer(j, "downlink", where);
    const Json& ls = field(j, "links", where);
    if (!ls.is_array()) schema_error(where + ".links must be an array");
    for (const auto& l : ls) {
      if (!l.is_number_integer()) schema_error(where + ".links must hold integers");
      p.links.push_back(l.get<int>());
    }
    t.paths.push_back(std::move(p));
  }
  t.build_index();
  return t;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

Topology load_topology(const std::string& path) { return topology_from_json(read_json_file(path)); }

void save_topology(const Topology& topology, const std::string& path) {
  write_text_file(path, topology_to_json(topology).dump(1) + "\n");
}

}  // namespace resv
