#include "planes3d/depth.hpp"

namespace planes3d {

BackProjection backproject(const DepthImage& depth, const Mat3& intrinsics) {
  BackProjection out;
  out.points.assign(depth.size(), Vec3::Zero());
  out.valid.assign(depth.size(), 0);
  for (int v = 0; v < depth.height; ++v) {
    for (int u = 0; u < depth.width; ++u) {
      const size_t i = static_cast<size_t>(v) * depth.width + u;
      const float d = depth(v, u);
      if (!depth_valid(d)) continue;
      out.points[i] = unproject_pixel(intrinsics, u, v, d);
      out.valid[i] = 1;
    }
  }
  return out;
}

NormalMap normals_from_depth(const DepthImage& depth, const Mat3& intrinsics) {
  if (depth.height < 3 || depth.width < 3)
    throw std::runtime_error("normals_from_depth: image must be at least 3x3");

  const BackProjection bp = backproject(depth, intrinsics);
  NormalMap out;
  out.normals.assign(depth.size(), Vec3::Zero());
  out.valid.assign(depth.size(), 0);

  const int w = depth.width;
  auto idx = [w](int v, int u) { return static_cast<size_t>(v) * w + u; };

  for (int v = 1; v < depth.height - 1; ++v) {
    for (int u = 1; u < depth.width - 1; ++u) {
      bool ok = true;
      for (int dv = -1; dv <= 1 && ok; ++dv)
        for (int du = -1; du <= 1 && ok; ++du)
          if (!bp.valid[idx(v + dv, u + du)]) ok = false;
      if (!ok) continue;

      const Vec3 dx = bp.points[idx(v, u + 1)] - bp.points[idx(v, u - 1)];
      const Vec3 dy = bp.points[idx(v + 1, u)] - bp.points[idx(v - 1, u)];
      Vec3 n = dx.cross(dy);
      const double len = n.norm();
      if (len < 1e-12) continue;
      n /= len;
      if (n.z() > 0) n = -n;  // orient toward the camera
      out.normals[idx(v, u)] = n;
      out.valid[idx(v, u)] = 1;
    }
  }
  return out;
}

}  // namespace planes3d
