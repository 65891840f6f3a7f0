#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace planes3d {

using Vec3 = Eigen::Vector3d;
using Vec3f = Eigen::Vector3f;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// Sentinel for "no plane instance assigned".
inline constexpr int kUnlabeled = -1;

/// Independent substream seed for (seed, stream); splitmix64 finalizer.
inline uint64_t mix_seed(uint64_t seed, uint64_t stream) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Row-major 2D image. (row, col) indexing; row 0 is the top of the image.
template <typename T>
struct Image {
  int height = 0;
  int width = 0;
  std::vector<T> data;

  Image() = default;
  Image(int h, int w, T fill = T{}) : height(h), width(w), data(static_cast<size_t>(h) * w, fill) {}

  T& operator()(int row, int col) { return data[static_cast<size_t>(row) * width + col]; }
  const T& operator()(int row, int col) const { return data[static_cast<size_t>(row) * width + col]; }

  bool inside(int row, int col) const { return row >= 0 && row < height && col >= 0 && col < width; }
  size_t size() const { return data.size(); }
};

/// Plane in Hessian normal form: normal . p == offset for points p on the plane.
struct Plane {
  Vec3 normal = Vec3::UnitZ();
  double offset = 0.0;

  double signed_distance(const Vec3& p) const { return normal.dot(p) - offset; }
  double distance(const Vec3& p) const { return std::abs(signed_distance(p)); }
  Vec3 project(const Vec3& p) const { return p - signed_distance(p) * normal; }
};

/// Pinhole camera with a rigid camera-to-world transform.
struct CameraPose {
  Mat3 intrinsics = Mat3::Identity();
  Mat4 camera_to_world = Mat4::Identity();

  Mat3 rotation() const { return camera_to_world.block<3, 3>(0, 0); }
  Vec3 translation() const { return camera_to_world.block<3, 1>(0, 3); }

  Vec3 to_world(const Vec3& p_cam) const { return rotation() * p_cam + translation(); }
  Vec3 to_camera(const Vec3& p_world) const {
    return rotation().transpose() * (p_world - translation());
  }

  bool valid(double tol = 1e-6) const {
    const Mat3 r = rotation();
    return (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() < tol &&
           std::abs(r.determinant() - 1.0) < tol;
  }
};

struct PointCloud {
  std::vector<Vec3> points;
  std::vector<int> labels;  // optional; empty or one per point

  size_t size() const { return points.size(); }
  bool has_labels() const { return !labels.empty(); }
};

/// Indexed triangle mesh. Normals, labels and embeddings are optional
/// per-vertex attributes; when present they have one entry per vertex.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
  std::vector<Vec3> vertex_normals;
  std::vector<int> vertex_labels;
  std::vector<Vec3f> vertex_embeddings;

  size_t vertex_count() const { return vertices.size(); }
  size_t face_count() const { return faces.size(); }
  bool has_normals() const { return vertex_normals.size() == vertices.size(); }
  bool has_labels() const { return vertex_labels.size() == vertices.size(); }
  bool has_embeddings() const { return vertex_embeddings.size() == vertices.size(); }

  void check_valid() const {
    for (const auto& f : faces) {
      for (int idx : f) {
        if (idx < 0 || idx >= static_cast<int>(vertices.size()))
          throw std::runtime_error("TriMesh: face index out of range");
      }
    }
    if (!vertex_normals.empty() && vertex_normals.size() != vertices.size())
      throw std::runtime_error("TriMesh: normal count mismatch");
    if (!vertex_labels.empty() && vertex_labels.size() != vertices.size())
      throw std::runtime_error("TriMesh: label count mismatch");
    if (!vertex_embeddings.empty() && vertex_embeddings.size() != vertices.size())
      throw std::runtime_error("TriMesh: embedding count mismatch");
  }
};

/// Project a camera-frame point to pixel coordinates (no rounding).
inline Eigen::Vector2d project_pixel(const Mat3& intrinsics, const Vec3& p_cam) {
  return {intrinsics(0, 0) * p_cam.x() / p_cam.z() + intrinsics(0, 2),
          intrinsics(1, 1) * p_cam.y() / p_cam.z() + intrinsics(1, 2)};
}

/// Back-project pixel (u, v) at given depth (z in camera frame).
inline Vec3 unproject_pixel(const Mat3& intrinsics, double u, double v, double depth) {
  return {(u - intrinsics(0, 2)) / intrinsics(0, 0) * depth,
          (v - intrinsics(1, 2)) / intrinsics(1, 1) * depth, depth};
}

}  // namespace planes3d
