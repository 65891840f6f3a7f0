#include "planes3d/tsdf.hpp"

#include "mc_tables.hpp"

#include <cmath>
#include <unordered_map>

namespace planes3d {

TsdfVolume::TsdfVolume(const Vec3& origin, const Eigen::Vector3i& dims, double voxel_size,
                       double truncation)
    : origin_(origin), dims_(dims), voxel_size_(voxel_size), truncation_(truncation) {
  if (dims.minCoeff() < 2) throw std::runtime_error("TsdfVolume: need at least 2 voxels per axis");
  if (voxel_size <= 0 || truncation <= 0)
    throw std::runtime_error("TsdfVolume: voxel_size and truncation must be positive");
  for (int a = 0; a < 3; ++a)
    if (dims[a] >= (1 << 20)) throw std::runtime_error("TsdfVolume: axis too large");
  const size_t n = static_cast<size_t>(dims.x()) * dims.y() * dims.z();
  tsdf_.assign(n, 1.0f);
  weight_.assign(n, 0.0f);
  planar_.assign(n, 0.0f);
}

TsdfVolume TsdfVolume::from_bounds(const Vec3& lo, const Vec3& hi, double voxel_size,
                                   double truncation) {
  if ((hi - lo).minCoeff() <= 0) throw std::runtime_error("TsdfVolume: empty bounds");
  Eigen::Vector3i dims;
  for (int a = 0; a < 3; ++a) dims[a] = static_cast<int>(std::ceil((hi[a] - lo[a]) / voxel_size)) + 1;
  return TsdfVolume(lo, dims, voxel_size, truncation);
}

void TsdfVolume::integrate(const DepthImage& depth, const Image<float>& planar_prob,
                           const CameraPose& pose) {
  if (depth.height != planar_prob.height || depth.width != planar_prob.width)
    throw std::runtime_error("TsdfVolume::integrate: depth/planar resolution mismatch");

  const Mat3 r_wc = pose.rotation().transpose();
  const Vec3 t = pose.translation();
  const Mat3& K = pose.intrinsics;

  for (int k = 0; k < dims_.z(); ++k) {
    for (int j = 0; j < dims_.y(); ++j) {
      for (int i = 0; i < dims_.x(); ++i) {
        const Vec3 p_cam = r_wc * (voxel_center(i, j, k) - t);
        if (p_cam.z() <= 0) continue;
        const Eigen::Vector2d px = project_pixel(K, p_cam);
        const int u = static_cast<int>(std::lround(px.x()));
        const int v = static_cast<int>(std::lround(px.y()));
        if (!depth.inside(v, u)) continue;
        const float d = depth(v, u);
        if (!depth_valid(d)) continue;
        const double sdf = d - p_cam.z();
        if (sdf <= -truncation_) continue;
        const float obs = static_cast<float>(std::min(1.0, sdf / truncation_));
        const size_t idx = index(i, j, k);
        const float w = weight_[idx];
        tsdf_[idx] = (tsdf_[idx] * w + obs) / (w + 1.0f);
        planar_[idx] = (planar_[idx] * w + planar_prob(v, u)) / (w + 1.0f);
        weight_[idx] = w + 1.0f;
      }
    }
  }
}

int64_t pack_edge_key(int x, int y, int z, int axis) {
  return (static_cast<int64_t>(x) << 42) | (static_cast<int64_t>(y) << 22) |
         (static_cast<int64_t>(z) << 2) | axis;
}

double TsdfVolume::tsdf_interp(const Vec3& p) const {
  const Vec3 g = (p - origin_) / voxel_size_;
  Eigen::Vector3i base;
  Vec3 r;
  for (int a = 0; a < 3; ++a) {
    base[a] = static_cast<int>(std::floor(g[a]));
    r[a] = g[a] - base[a];
  }
  auto clamped = [&](int i, int j, int k) {
    i = std::clamp(i, 0, dims_.x() - 1);
    j = std::clamp(j, 0, dims_.y() - 1);
    k = std::clamp(k, 0, dims_.z() - 1);
    return static_cast<double>(tsdf_[index(i, j, k)]);
  };
  double out = 0.0;
  for (int dx = 0; dx < 2; ++dx)
    for (int dy = 0; dy < 2; ++dy)
      for (int dz = 0; dz < 2; ++dz) {
        const double w = (dx ? r.x() : 1 - r.x()) * (dy ? r.y() : 1 - r.y()) *
                         (dz ? r.z() : 1 - r.z());
        out += w * clamped(base.x() + dx, base.y() + dy, base.z() + dz);
      }
  return out;
}

TriMesh TsdfVolume::extract_mesh(double planar_threshold,
                                 std::vector<int64_t>* edge_keys) const {
  // Corner and edge layout per http://paulbourke.net/geometry/polygonise/.
  static constexpr int kShift[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                                       {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
  // Edge i starts at voxel (x,y,z)+offset and runs along the stored axis.
  static constexpr int kEdgeShift[12][4] = {
      {0, 0, 0, 0}, {1, 0, 0, 1}, {0, 1, 0, 0}, {0, 0, 0, 1},
      {0, 0, 1, 0}, {1, 0, 1, 1}, {0, 1, 1, 0}, {0, 0, 1, 1},
      {0, 0, 0, 2}, {1, 0, 0, 2}, {1, 1, 0, 2}, {0, 1, 0, 2}};
  static constexpr int kEdgeToVert[12][2] = {{0, 1}, {1, 2}, {3, 2}, {0, 3},
                                             {4, 5}, {5, 6}, {7, 6}, {4, 7},
                                             {0, 4}, {1, 5}, {2, 6}, {3, 7}};

  TriMesh mesh;
  if (edge_keys) edge_keys->clear();
  std::unordered_map<int64_t, int> edge_to_vertex;
  int edge_index[12];

  for (int z = 0; z < dims_.z() - 1; ++z) {
    for (int y = 0; y < dims_.y() - 1; ++y) {
      for (int x = 0; x < dims_.x() - 1; ++x) {
        float f[8];
        int cube = 0;
        bool observed = true, planar_ok = true;
        for (int c = 0; c < 8 && observed; ++c) {
          const size_t idx = index(x + kShift[c][0], y + kShift[c][1], z + kShift[c][2]);
          if (weight_[idx] == 0.0f) {
            observed = false;
            break;
          }
          if (planar_[idx] < planar_threshold) planar_ok = false;
          f[c] = tsdf_[idx];
          if (f[c] < 0.0f) cube |= 1 << c;
        }
        if (!observed || !planar_ok || cube == 0 || cube == 255) continue;

        for (int e = 0; e < 12; ++e) {
          if (!(mc::kEdgeTable[cube] & (1 << e))) continue;
          const int64_t key = pack_edge_key(x + kEdgeShift[e][0], y + kEdgeShift[e][1],
                                            z + kEdgeShift[e][2], kEdgeShift[e][3]);
          auto it = edge_to_vertex.find(key);
          if (it == edge_to_vertex.end()) {
            const double f0 = std::abs(static_cast<double>(f[kEdgeToVert[e][0]]));
            const double f1 = std::abs(static_cast<double>(f[kEdgeToVert[e][1]]));
            Vec3 p = voxel_center(x + kEdgeShift[e][0], y + kEdgeShift[e][1], z + kEdgeShift[e][2]);
            p[kEdgeShift[e][3]] += voxel_size_ * f0 / (f0 + f1);
            const int vi = static_cast<int>(mesh.vertices.size());
            mesh.vertices.push_back(p);
            if (edge_keys) edge_keys->push_back(key);
            edge_to_vertex.emplace(key, vi);
            edge_index[e] = vi;
          } else {
            edge_index[e] = it->second;
          }
        }

        for (int t = 0; mc::kTriTable[cube][t] != -1; t += 3) {
          const int a = edge_index[mc::kTriTable[cube][t]];
          const int b = edge_index[mc::kTriTable[cube][t + 2]];
          const int c = edge_index[mc::kTriTable[cube][t + 1]];
          if (a == b || b == c || a == c) continue;
          mesh.faces.push_back({a, b, c});
        }
      }
    }
  }

  mesh.vertex_normals.resize(mesh.vertices.size(), Vec3::Zero());
  const double half_gap = 0.99 * voxel_size_;
  for (size_t i = 0; i < mesh.vertices.size(); ++i) {
    Vec3 grad;
    for (int a = 0; a < 3; ++a) {
      Vec3 p0 = mesh.vertices[i], p1 = mesh.vertices[i];
      p0[a] -= half_gap;
      p1[a] += half_gap;
      grad[a] = tsdf_interp(p1) - tsdf_interp(p0);
    }
    const double len = grad.norm();
    if (len > 1e-12) mesh.vertex_normals[i] = grad / len;
  }
  return mesh;
}

}  // namespace planes3d
