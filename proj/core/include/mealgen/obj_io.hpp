#pragma once

#include <filesystem>
#include <string>

#include "mealgen/mesh.hpp"

namespace mealgen {

// Wavefront OBJ subset: `v` and `f` records, faces must be triangles.
// Any other record type is ignored. Errors name the offending line.
TriangleMesh parse_obj(const std::string& text);
TriangleMesh load_obj(const std::filesystem::path& file);

} // namespace mealgen
