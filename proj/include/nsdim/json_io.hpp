#pragma once

#include <nsdim/netmatrix.hpp>
#include <nsdim/sampling.hpp>

#include <json.hpp>

namespace nsdim {

using Json = nlohmann::ordered_json;

Json to_json(const SeedSpec& seed);
SeedSpec seed_from_json(const Json& j);

Json to_json(const Box& box);
Box box_from_json(const Json& j);

Json to_json(const NetworkSpec& network);
NetworkSpec network_from_json(const Json& j);

/// Grid metadata (mode, domain, seed, size); points are not included.
Json grid_header_json(const InputGrid& grid);

}  // namespace nsdim
