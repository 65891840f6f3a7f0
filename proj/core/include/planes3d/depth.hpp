#pragma once

#include "planes3d/geometry.hpp"

namespace planes3d {

using DepthImage = Image<float>;

inline bool depth_valid(float d) { return std::isfinite(d) && d > 0.0f; }

/// Back-project every valid pixel to a camera-frame point. Invalid pixels get
/// a zero point and valid_mask entry false.
struct BackProjection {
  std::vector<Vec3> points;       // H*W, row-major
  std::vector<uint8_t> valid;     // H*W, row-major
};

BackProjection backproject(const DepthImage& depth, const Mat3& intrinsics);

/// Per-pixel camera-frame normals by central differences over back-projected
/// points. A pixel's normal is valid only when all nine pixels of its 3x3
/// neighborhood carry valid depth; normals are oriented toward the camera
/// (negative z). Throws if the image is smaller than 3x3.
struct NormalMap {
  std::vector<Vec3> normals;      // H*W, row-major
  std::vector<uint8_t> valid;     // H*W, row-major
};

NormalMap normals_from_depth(const DepthImage& depth, const Mat3& intrinsics);

}  // namespace planes3d
