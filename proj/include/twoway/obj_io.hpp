#pragma once

#include <iosfwd>
#include <string>

#include "twoway/mesh.hpp"

namespace twoway {

/// Reads `v x y z`, `f i j k` and `l i j` records (1-based indices).
/// Throws std::runtime_error with a line number on malformed input.
MeshState read_obj(const std::string& path);
MeshState read_obj_stream(std::istream& in, const std::string& name);

/// Writes vertices/faces/strand lines with 9 significant digits.
void write_obj(const std::string& path, const MeshState& mesh);
void write_obj(const std::string& path, const MeshState& mesh, PositionsView positions);

}  // namespace twoway
