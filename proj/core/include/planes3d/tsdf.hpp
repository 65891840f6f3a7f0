#pragma once

#include "planes3d/depth.hpp"
#include "planes3d/geometry.hpp"

namespace planes3d {

/// Truncated signed distance volume with a fused planar-probability channel.
/// Voxel (i,j,k) is centered at origin + voxel_size * (i,j,k). tsdf starts at
/// 1 (free), weight at 0 (unobserved), planar at 0.
class TsdfVolume {
 public:
  TsdfVolume(const Vec3& origin, const Eigen::Vector3i& dims, double voxel_size,
             double truncation);

  /// Volume covering [lo, hi] so that voxel centers enclose the box.
  static TsdfVolume from_bounds(const Vec3& lo, const Vec3& hi, double voxel_size,
                                double truncation);

  const Vec3& origin() const { return origin_; }
  const Eigen::Vector3i& dims() const { return dims_; }
  double voxel_size() const { return voxel_size_; }
  double truncation() const { return truncation_; }

  size_t index(int i, int j, int k) const {
    return (static_cast<size_t>(k) * dims_.y() + j) * dims_.x() + i;
  }
  Vec3 voxel_center(int i, int j, int k) const {
    return origin_ + voxel_size_ * Vec3(i, j, k);
  }

  float tsdf_at(int i, int j, int k) const { return tsdf_[index(i, j, k)]; }
  float weight_at(int i, int j, int k) const { return weight_[index(i, j, k)]; }
  float planar_at(int i, int j, int k) const { return planar_[index(i, j, k)]; }

  /// Fuse one posed frame. Every voxel center projects to its nearest pixel;
  /// voxels deeper than one truncation band behind the observed surface are
  /// left untouched, everything else folds min(1, sdf/truncation) and the
  /// pixel's planar probability into per-voxel running means (weight += 1).
  /// Throws when the two images disagree in resolution.
  void integrate(const DepthImage& depth, const Image<float>& planar_prob,
                 const CameraPose& pose);

  /// Marching cubes over fully observed cubes; cubes touching any corner with
  /// fused planar probability below planar_threshold (strict) are skipped.
  /// Vertices are deduplicated per grid edge; normals come from the trilinear
  /// TSDF gradient. When edge_keys is non-null it receives one packed grid
  /// edge id per vertex, stable across repeated extractions of this volume.
  TriMesh extract_mesh(double planar_threshold, std::vector<int64_t>* edge_keys = nullptr) const;

  /// Trilinearly interpolated TSDF at a world point (indices clamped at the
  /// volume border).
  double tsdf_interp(const Vec3& p) const;

 private:
  Vec3 origin_;
  Eigen::Vector3i dims_;
  double voxel_size_;
  double truncation_;
  std::vector<float> tsdf_, weight_, planar_;
};

/// Packs a grid-edge id (base voxel + axis) into one int64; inverse of the
/// keys reported by extract_mesh.
int64_t pack_edge_key(int x, int y, int z, int axis);

}  // namespace planes3d
