#include "planes3d/planarize.hpp"

namespace planes3d {

TriMesh planarize(const TriMesh& mesh, const std::vector<PlaneInstance>& instances) {
  if (!mesh.has_labels()) throw std::runtime_error("planarize: mesh has no labels");

  TriMesh out;
  std::vector<int> remap(mesh.vertex_count(), -1);
  for (size_t v = 0; v < mesh.vertex_count(); ++v) {
    const int lab = mesh.vertex_labels[v];
    if (lab == kUnlabeled) continue;
    if (lab < 0 || lab >= static_cast<int>(instances.size()))
      throw std::runtime_error("planarize: label without instance");
    remap[v] = static_cast<int>(out.vertices.size());
    const Plane& plane = instances[lab].plane;
    out.vertices.push_back(plane.project(mesh.vertices[v]));
    out.vertex_labels.push_back(lab);
    if (mesh.has_normals()) out.vertex_normals.push_back(plane.normal);
    if (mesh.has_embeddings()) out.vertex_embeddings.push_back(mesh.vertex_embeddings[v]);
  }

  // Faces survive only when all corners landed on the same instance; mixed
  // faces would bridge distinct planes.
  for (const auto& f : mesh.faces) {
    const int lab = mesh.vertex_labels[f[0]];
    if (lab == kUnlabeled) continue;
    if (mesh.vertex_labels[f[1]] != lab || mesh.vertex_labels[f[2]] != lab) continue;
    out.faces.push_back({remap[f[0]], remap[f[1]], remap[f[2]]});
  }
  return out;
}

}  // namespace planes3d
