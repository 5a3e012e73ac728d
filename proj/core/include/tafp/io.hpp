#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "tafp/problem.hpp"
#include "tafp/stack.hpp"

namespace tafp {

/// JSON text forms. Parsing throws Error(kParse) on malformed input and
/// rethrows validation errors from the parsed objects.
std::string problem_to_json(const Problem& problem);
Problem problem_from_json(std::string_view text);

std::string floorplan_to_json(const Floorplan& fp);
Floorplan floorplan_from_json(std::string_view text);

/// File helpers. Throw Error(kIo) when the file cannot be read or written.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

Problem load_problem(const std::filesystem::path& path);
void save_problem(const std::filesystem::path& path, const Problem& problem);
Floorplan load_floorplan(const std::filesystem::path& path);
void save_floorplan(const std::filesystem::path& path, const Floorplan& fp);

}  // namespace tafp
