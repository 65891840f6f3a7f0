#pragma once

#include "planes3d/geometry.hpp"

#include <string>

namespace planes3d {

/// Fixed 64-entry color palette; instance colors are palette[label % 64].
/// Unlabeled vertices render mid-gray.
std::array<uint8_t, 3> label_color(int label);

/// Binary little-endian PLY with x/y/z, optional nx/ny/nz, red/green/blue
/// from the palette, and a per-vertex int plane_id (written whenever the mesh
/// carries labels).
void write_ply(const std::string& path, const TriMesh& mesh);

/// Reads ascii or binary little-endian PLY. Recovers positions, normals and
/// plane_id when present; other properties are skipped.
TriMesh read_ply(const std::string& path);

/// Wavefront OBJ with positions (with palette colors appended to each vertex
/// line when labels exist), normals, and faces.
void write_obj(const std::string& path, const TriMesh& mesh);

}  // namespace planes3d
