#include "planes3d/mesh_ops.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <random>

namespace planes3d {

std::vector<std::vector<int>> vertex_adjacency(const TriMesh& mesh) {
  std::vector<std::vector<int>> adj(mesh.vertex_count());
  for (const auto& f : mesh.faces) {
    for (int e = 0; e < 3; ++e) {
      const int a = f[e], b = f[(e + 1) % 3];
      adj[a].push_back(b);
      adj[b].push_back(a);
    }
  }
  for (auto& nbrs : adj) {
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
  }
  return adj;
}

int split_by_connectivity(TriMesh& mesh) {
  if (!mesh.has_labels()) throw std::runtime_error("split_by_connectivity: mesh has no labels");
  const auto adj = vertex_adjacency(mesh);
  const int n = static_cast<int>(mesh.vertex_count());
  std::vector<int> out(n, kUnlabeled);
  int next = 0;
  for (int s = 0; s < n; ++s) {
    if (mesh.vertex_labels[s] == kUnlabeled || out[s] != kUnlabeled) continue;
    const int lab = mesh.vertex_labels[s];
    const int comp = next++;
    std::queue<int> q;
    q.push(s);
    out[s] = comp;
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (int nb : adj[v]) {
        if (out[nb] == kUnlabeled && mesh.vertex_labels[nb] == lab) {
          out[nb] = comp;
          q.push(nb);
        }
      }
    }
  }
  mesh.vertex_labels = std::move(out);
  return next;
}

void propagate_labels(TriMesh& mesh) {
  if (!mesh.has_labels()) throw std::runtime_error("propagate_labels: mesh has no labels");
  const auto adj = vertex_adjacency(mesh);
  const int n = static_cast<int>(mesh.vertex_count());
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<std::pair<int, int>> updates;  // (vertex, new label)
    for (int v = 0; v < n; ++v) {
      if (mesh.vertex_labels[v] != kUnlabeled) continue;
      std::map<int, int> votes;
      for (int nb : adj[v]) {
        const int lab = mesh.vertex_labels[nb];
        if (lab != kUnlabeled) ++votes[lab];
      }
      if (votes.empty()) continue;
      int best_lab = -1, best_count = 0;
      for (const auto& [lab, count] : votes) {
        if (count > best_count) {  // map iterates labels ascending, so ties keep the lowest id
          best_count = count;
          best_lab = lab;
        }
      }
      updates.emplace_back(v, best_lab);
    }
    for (const auto& [v, lab] : updates) mesh.vertex_labels[v] = lab;
    changed = !updates.empty();
  }
}

void remove_small_instances(TriMesh& mesh, int min_vertices) {
  if (!mesh.has_labels()) throw std::runtime_error("remove_small_instances: mesh has no labels");
  std::map<int, int> counts;
  for (int lab : mesh.vertex_labels)
    if (lab != kUnlabeled) ++counts[lab];
  for (int& lab : mesh.vertex_labels)
    if (lab != kUnlabeled && counts[lab] < min_vertices) lab = kUnlabeled;
}

int compact_labels(TriMesh& mesh) {
  if (!mesh.has_labels()) throw std::runtime_error("compact_labels: mesh has no labels");
  std::map<int, int> remap;
  int next = 0;
  for (int& lab : mesh.vertex_labels) {
    if (lab == kUnlabeled) continue;
    auto it = remap.find(lab);
    if (it == remap.end()) it = remap.emplace(lab, next++).first;
    lab = it->second;
  }
  return next;
}

PointCloud sample_mesh_surface(const TriMesh& mesh, int n_points, bool exclude_ambiguous_faces,
                               uint64_t seed) {
  mesh.check_valid();
  PointCloud cloud;
  if (n_points < 0) throw std::runtime_error("sample_mesh_surface: negative sample count");

  std::vector<double> weights(mesh.face_count(), 0.0);
  std::vector<int> face_label(mesh.face_count(), kUnlabeled);
  double total_area = 0.0;
  for (size_t f = 0; f < mesh.face_count(); ++f) {
    const auto& tri = mesh.faces[f];
    const Vec3& a = mesh.vertices[tri[0]];
    const double area =
        0.5 * (mesh.vertices[tri[1]] - a).cross(mesh.vertices[tri[2]] - a).norm();
    total_area += area;

    bool ambiguous = false;
    if (mesh.has_labels()) {
      const int l0 = mesh.vertex_labels[tri[0]], l1 = mesh.vertex_labels[tri[1]],
                l2 = mesh.vertex_labels[tri[2]];
      ambiguous = !(l0 == l1 && l1 == l2);
      if (!ambiguous) face_label[f] = l0;
    }
    if (!(exclude_ambiguous_faces && ambiguous)) weights[f] = area;
  }
  if (total_area <= 0.0) throw std::runtime_error("sample_mesh_surface: mesh has no surface area");
  if (n_points == 0) return cloud;

  double usable = 0.0;
  for (double w : weights) usable += w;
  if (usable <= 0.0) return cloud;  // every face masked out

  std::mt19937_64 rng(seed);
  std::discrete_distribution<size_t> pick_face(weights.begin(), weights.end());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  cloud.points.reserve(n_points);
  if (mesh.has_labels()) cloud.labels.reserve(n_points);
  for (int s = 0; s < n_points; ++s) {
    const size_t f = pick_face(rng);
    const auto& tri = mesh.faces[f];
    double u = unit(rng), v = unit(rng);
    if (u + v > 1.0) {
      u = 1.0 - u;
      v = 1.0 - v;
    }
    const Vec3& a = mesh.vertices[tri[0]];
    cloud.points.push_back(a + u * (mesh.vertices[tri[1]] - a) + v * (mesh.vertices[tri[2]] - a));
    if (mesh.has_labels()) cloud.labels.push_back(face_label[f]);
  }
  return cloud;
}

std::vector<std::vector<int>> vertices_by_label(const TriMesh& mesh, int label_count) {
  std::vector<std::vector<int>> groups(label_count);
  for (int v = 0; v < static_cast<int>(mesh.vertex_count()); ++v) {
    const int lab = mesh.vertex_labels[v];
    if (lab == kUnlabeled) continue;
    if (lab < 0 || lab >= label_count)
      throw std::runtime_error("vertices_by_label: label out of range");
    groups[lab].push_back(v);
  }
  return groups;
}

}  // namespace planes3d
