#pragma once

#include <string>

#include <json.hpp>

#include "resv/network.hpp"

namespace resv {

using Json = nlohmann::ordered_json;

inline constexpr const char* kTopologySchema = "resv.topology/1";

/// Serializes nodes, links, users (with demand parameters), downlinks and paths.
Json topology_to_json(const Topology& topology);

/// Parses and validates; schema problems raise ConfigError, structural ones
/// StructuralError.
Topology topology_from_json(const Json& doc);

Topology load_topology(const std::string& path);
void save_topology(const Topology& topology, const std::string& path);

/// Shared helpers for the other document formats.
Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace resv
