#pragma once

// Patch files: one JSON document with a header (space, grid shape, spacing,
// topology, periodicity, Dirichlet mask) followed by the point coordinates,
// one array of n+1 numbers per vertex with x0 first, in row-major grid order.

#include "afp/immersion.hpp"
#include "afp/json_format.hpp"

#include <filesystem>

namespace afp {

Json point_to_json(const HyperboloidPoint& p);
HyperboloidPoint point_from_json(const ModelSpace& space, const Json& j);

Json patch_to_json(const ParametricPatch& patch);
ParametricPatch patch_from_json(const Json& j);

void write_patch(const std::filesystem::path& path, const ParametricPatch& patch);
ParametricPatch read_patch(const std::filesystem::path& path);

}  // namespace afp
