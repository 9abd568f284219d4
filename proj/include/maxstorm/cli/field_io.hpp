#pragma once

#include <filesystem>
#include <string>
#include <variant>

#include "maxstorm/spacetime_markov.hpp"

namespace maxstorm::cli {

using AnyField = std::variant<PlanarSpaceTimeField, SphereSpaceTimeField>;

// Shortest decimal representation that parses back to the same double.
[[nodiscard]] std::string format_double(double v);

// CSV with header t,x1,x2,value (planar) or t,vx,vy,vz,value (sphere); one
// row per (date, site), dates outer, LF line endings.
[[nodiscard]] std::string field_to_csv(const PlanarSpaceTimeField& field);
[[nodiscard]] std::string field_to_csv(const SphereSpaceTimeField& field);

// Throws ValidationError citing the line number on malformed input.
[[nodiscard]] AnyField parse_field_csv(const std::string& text);

void write_text_file(const std::filesystem::path& path, const std::string& text);
[[nodiscard]] std::string read_text_file(const std::filesystem::path& path);
[[nodiscard]] AnyField read_field_file(const std::filesystem::path& path);

}  // namespace maxstorm::cli
