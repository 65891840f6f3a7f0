#pragma once

#include "planes3d/geometry.hpp"

namespace planes3d {

/// Per-vertex neighbor lists from face edges (each undirected edge once,
/// neighbors sorted ascending).
std::vector<std::vector<int>> vertex_adjacency(const TriMesh& mesh);

/// Split every label into its mesh-connected components. Unlabeled vertices
/// stay unlabeled. Components are renumbered 0..k-1 in order of first
/// appearance by vertex index. Returns the number of components.
int split_by_connectivity(TriMesh& mesh);

/// Grow labels into unlabeled vertices in synchronous rounds: every unlabeled
/// vertex with at least one labeled neighbor adopts the most frequent
/// neighbor label (ties go to the lowest label id), all such vertices update
/// at once, and rounds repeat until nothing changes. Vertices in components
/// with no labels at all stay unlabeled.
void propagate_labels(TriMesh& mesh);

/// Unlabel every instance with fewer than min_vertices vertices.
void remove_small_instances(TriMesh& mesh, int min_vertices);

/// Renumber labels to 0..k-1 in order of first appearance by vertex index.
/// Returns k.
int compact_labels(TriMesh& mesh);

/// Vertex indices per label id (labels must already be compact 0..k-1).
std::vector<std::vector<int>> vertices_by_label(const TriMesh& mesh, int label_count);

/// Uniform area-weighted surface sampling. Each sample takes its face's
/// unanimous vertex label (-1 when the face mixes labels). With
/// exclude_ambiguous_faces set, faces whose corners carry two or more
/// distinct labels contribute nothing, which can leave the cloud empty.
/// Deterministic for a fixed seed. Throws when the mesh has no face area.
PointCloud sample_mesh_surface(const TriMesh& mesh, int n_points, bool exclude_ambiguous_faces,
                               uint64_t seed);

}  // namespace planes3d
