#pragma once

// nlohmann conversions shared inside the library.

#include <json.hpp>

#include "tafp/problem.hpp"
#include "tafp/stack.hpp"

namespace tafp::json_io {

using Json = nlohmann::ordered_json;

Json to_json(const StackSpec& s);
StackSpec stack_from(const Json& j);
Json to_json(const Floorplan& fp);
Floorplan floorplan_from(const Json& j);
Json to_json(const Problem& p);
Problem problem_from(const Json& j);
Json to_json(const AirWall& w);
AirWall wall_from(const Json& j);

/// Parses text, mapping parser failures to Error(kParse).
Json parse(std::string_view text);

}  // namespace tafp::json_io
