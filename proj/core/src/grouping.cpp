#include "planes3d/grouping.hpp"

#include "planes3d/mesh_ops.hpp"

#include <map>
#include <numeric>
#include <random>

namespace planes3d {

namespace {

Vec3 mean_vertex_normal(const TriMesh& mesh, const std::vector<int>& vertices) {
  Vec3 n = Vec3::Zero();
  if (!mesh.has_normals()) return n;
  for (int v : vertices) n += mesh.vertex_normals[v];
  return n;
}

Vec3f mean_embedding(const TriMesh& mesh, const std::vector<int>& vertices) {
  Vec3f e = Vec3f::Zero();
  if (!mesh.has_embeddings() || vertices.empty()) return e;
  for (int v : vertices) e += mesh.vertex_embeddings[v];
  return e / static_cast<float>(vertices.size());
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void join(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

/// split -> grow -> drop small -> renumber; shared tail of both groupings.
std::vector<PlaneInstance> finalize_labels(TriMesh& mesh, int min_vertices) {
  split_by_connectivity(mesh);
  propagate_labels(mesh);
  remove_small_instances(mesh, min_vertices);
  const int count = compact_labels(mesh);
  return build_instances(mesh, count);
}

}  // namespace

Plane fit_plane(const std::vector<Vec3>& points, const Vec3& orient_hint) {
  if (points.size() < 3) throw std::runtime_error("fit_plane: needs at least 3 points");
  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());

  Mat3 cov = Mat3::Zero();
  for (const Vec3& p : points) {
    const Vec3 d = p - centroid;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
  // eigenvalues ascend; a plane needs two spread directions.
  const double mid = es.eigenvalues()(1), top = es.eigenvalues()(2);
  if (!(mid > 1e-10 * top) || !(top > 0.0))
    throw std::runtime_error("fit_plane: collinear or degenerate points");
  Vec3 n = es.eigenvectors().col(0).normalized();
  if (orient_hint.dot(n) < 0) n = -n;
  return {n, n.dot(centroid)};
}

Plane fit_plane(const TriMesh& mesh, const std::vector<int>& vertices) {
  std::vector<Vec3> pts;
  pts.reserve(vertices.size());
  for (int v : vertices) pts.push_back(mesh.vertices[v]);
  return fit_plane(pts, mean_vertex_normal(mesh, vertices));
}

std::vector<PlaneInstance> build_instances(const TriMesh& mesh, int label_count) {
  std::vector<PlaneInstance> out(label_count);
  const auto groups = vertices_by_label(mesh, label_count);
  for (int k = 0; k < label_count; ++k) {
    out[k].label = k;
    out[k].vertices = groups[k];
    out[k].plane = fit_plane(mesh, groups[k]);
    out[k].mean_embedding = mean_embedding(mesh, groups[k]);
    const Vec3 mn = mean_vertex_normal(mesh, groups[k]);
    out[k].mean_normal = mn.norm() > 1e-12 ? mn.normalized() : out[k].plane.normal;
  }
  return out;
}

bool is_inlier(const Vec3& position, const Vec3f& embedding, const Plane& proposal,
               const Vec3f& proposal_embedding, const RansacConfig& cfg) {
  if (proposal.distance(position) >= cfg.r_d) return false;
  if (!cfg.use_embeddings) return true;
  return (embedding - proposal_embedding).norm() < cfg.r_e;
}

std::vector<PlaneInstance> merge_planes(TriMesh& mesh, std::vector<PlaneInstance> instances,
                                        double merge_embedding, double merge_normal_dot) {
  if (instances.size() < 2) return instances;
  const int k = static_cast<int>(instances.size());
  UnionFind uf(k);
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      const bool emb_close =
          (instances[i].mean_embedding - instances[j].mean_embedding).norm() < merge_embedding;
      const bool normals_agree =
          instances[i].mean_normal.dot(instances[j].mean_normal) > merge_normal_dot;
      if (emb_close && normals_agree) uf.join(i, j);
    }

  std::vector<int> remap(k, kUnlabeled);
  int next = 0;
  for (int i = 0; i < k; ++i)
    if (uf.find(i) == i) remap[i] = next++;
  for (int& lab : mesh.vertex_labels)
    if (lab != kUnlabeled) lab = remap[uf.find(lab)];
  return build_instances(mesh, next);
}

std::vector<PlaneInstance> sequential_ransac(TriMesh& mesh, const RansacConfig& cfg) {
  if (!mesh.has_normals()) throw std::runtime_error("sequential_ransac: mesh needs normals");
  if (cfg.use_embeddings && !mesh.has_embeddings())
    throw std::runtime_error("sequential_ransac: mesh needs embeddings");

  const int n = static_cast<int>(mesh.vertex_count());
  mesh.vertex_labels.assign(n, kUnlabeled);
  std::vector<int> pool(n);
  std::iota(pool.begin(), pool.end(), 0);

  std::mt19937_64 rng(cfg.seed);
  int committed = 0;

  auto inlier = [&](int v, const Plane& plane, const Vec3f& emb) {
    const Vec3f& ev = cfg.use_embeddings ? mesh.vertex_embeddings[v] : emb;
    return is_inlier(mesh.vertices[v], ev, plane, emb, cfg);
  };

  for (int round = 0; round < cfg.max_iterations; ++round) {
    if (static_cast<int>(pool.size()) < cfg.min_vertices) break;
    std::uniform_int_distribution<size_t> pick(0, pool.size() - 1);

    int best_count = 0;
    Plane best_plane;
    Vec3f best_emb = Vec3f::Zero();
    for (int p = 0; p < cfg.proposals_per_round; ++p) {
      const int s = pool[pick(rng)];
      const Vec3& sn = mesh.vertex_normals[s];
      if (sn.squaredNorm() < 1e-12) continue;
      const Plane plane{sn.normalized(), sn.normalized().dot(mesh.vertices[s])};
      const Vec3f emb = cfg.use_embeddings ? mesh.vertex_embeddings[s] : Vec3f::Zero();
      int count = 0;
      for (int v : pool)
        if (inlier(v, plane, emb)) ++count;
      if (count > best_count) {
        best_count = count;
        best_plane = plane;
        best_emb = emb;
      }
    }
    if (best_count < cfg.min_vertices) break;

    std::vector<int> rest;
    rest.reserve(pool.size() - best_count);
    for (int v : pool) {
      if (inlier(v, best_plane, best_emb)) {
        mesh.vertex_labels[v] = committed;
      } else {
        rest.push_back(v);
      }
    }
    pool.swap(rest);
    ++committed;
  }

  if (cfg.use_embeddings && committed > 1)
    merge_planes(mesh, build_instances(mesh, committed), cfg.merge_embedding,
                 cfg.merge_normal_dot);

  return finalize_labels(mesh, cfg.min_vertices);
}

std::vector<PlaneInstance> mean_shift_grouping(TriMesh& mesh, const MeanShiftConfig& cfg) {
  if (!mesh.has_embeddings()) throw std::runtime_error("mean_shift_grouping: mesh needs embeddings");
  const int n = static_cast<int>(mesh.vertex_count());
  mesh.vertex_labels.assign(n, kUnlabeled);
  if (n == 0) return {};

  const double bw = cfg.bandwidth;
  const double bw2 = bw * bw;
  using Cell = std::array<int, 3>;
  auto cell_of = [bw](const Vec3f& e) {
    return Cell{static_cast<int>(std::floor(e.x() / bw)),
                static_cast<int>(std::floor(e.y() / bw)),
                static_cast<int>(std::floor(e.z() / bw))};
  };

  std::map<Cell, std::vector<int>> grid;
  for (int v = 0; v < n; ++v) grid[cell_of(mesh.vertex_embeddings[v])].push_back(v);

  auto shift_once = [&](const Vec3f& mode, Vec3f& next) {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    int count = 0;
    const Cell c = cell_of(mode);
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dz = -1; dz <= 1; ++dz) {
          const auto it = grid.find(Cell{c[0] + dx, c[1] + dy, c[2] + dz});
          if (it == grid.end()) continue;
          for (int v : it->second) {
            const Vec3f& e = mesh.vertex_embeddings[v];
            if ((e - mode).squaredNorm() <= bw2) {
              sum += e.cast<double>();
              ++count;
            }
          }
        }
    if (count == 0) return 0;
    next = (sum / count).cast<float>();
    return count;
  };

  struct Mode {
    Vec3f position;
    int support = 0;
  };
  std::vector<Mode> modes;
  for (const auto& [cell, members] : grid) {
    Eigen::Vector3d seed_sum = Eigen::Vector3d::Zero();
    for (int v : members) seed_sum += mesh.vertex_embeddings[v].cast<double>();
    Vec3f mode = (seed_sum / members.size()).cast<float>();
    int support = 0;
    for (int it = 0; it < cfg.max_iterations; ++it) {
      Vec3f next;
      const int count = shift_once(mode, next);
      if (count == 0) break;
      support = count;
      const float step = (next - mode).norm();
      mode = next;
      if (step < cfg.tolerance) break;
    }
    modes.push_back({mode, support});
  }

  // Stronger modes absorb converged modes closer than half a bandwidth.
  std::vector<int> order(modes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return modes[a].support > modes[b].support; });
  std::vector<Vec3f> kept;
  for (int idx : order) {
    bool absorbed = false;
    for (const Vec3f& k : kept)
      if ((modes[idx].position - k).norm() < bw / 2) {
        absorbed = true;
        break;
      }
    if (!absorbed) kept.push_back(modes[idx].position);
  }

  for (int v = 0; v < n; ++v) {
    const Vec3f& e = mesh.vertex_embeddings[v];
    int best = 0;
    float best_d = (kept[0] - e).squaredNorm();
    for (int m = 1; m < static_cast<int>(kept.size()); ++m) {
      const float d = (kept[m] - e).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = m;
      }
    }
    mesh.vertex_labels[v] = best;
  }

  return finalize_labels(mesh, cfg.min_vertices);
}

}  // namespace planes3d
