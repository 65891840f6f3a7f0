#pragma once

#include "planes3d/scene_archive.hpp"

#include <filesystem>
#include <string>

namespace planes3d {

/// One finite rectangle of scene surface. u_axis and v_axis are unit length
/// and orthogonal; the front normal is u x v. Rectangles are one-sided: rays
/// arriving from behind pass through (thin structures therefore need a back
/// rect, see the divider and clutter slabs in the presets). priority breaks
/// exactly-coplanar hits, letting overlays win against their host wall.
struct SceneRect {
  int instance = 0;  // index into SyntheticScene::anchors
  Vec3 center = Vec3::Zero();
  Vec3 u_axis = Vec3::UnitX();
  Vec3 v_axis = Vec3::UnitY();
  double half_u = 1.0, half_v = 1.0;
  int priority = 0;
  bool planar = true;  // false = clutter: planar_prob 0.1, excluded from ground truth

  Vec3 normal() const { return u_axis.cross(v_axis); }
  Plane plane() const {
    const Vec3 n = normal();
    return {n, n.dot(center)};
  }
};

struct NoiseModel {
  double depth_sigma = 0.01;       // m, gaussian on every valid depth sample
  double embedding_sigma = 0.05;   // per channel, applied before any rotation
  bool rotate_embeddings = false;  // per-frame random orthogonal map on pixel embeddings
};

/// A fully procedural scene: rectangles with instance identities, embedding
/// anchors per identity, a camera path, and the noise model. `seed` drives
/// anchors and per-frame noise; `rotation_seed` drives only the per-frame
/// embedding rotations, so rotations can vary while the noise stays fixed.
struct SyntheticScene {
  std::vector<SceneRect> rects;
  int instance_count = 0;      // ground-truth (planar) instances, ids 0..count-1
  std::vector<Vec3f> anchors;  // one per instance id, clutter ids included at the end
  Mat3 intrinsics = Mat3::Identity();
  std::vector<Mat4> trajectory;  // camera_to_world per keyframe
  int height = 60, width = 80;
  NoiseModel noise;
  uint64_t seed = 0;
  uint64_t rotation_seed = 1;
};

/// Camera-to-world with +z toward target, +x world-right, +y world-down
/// (right-down-forward image convention, world up = +z). Throws when the
/// view direction is within ~2.5 degrees of vertical.
Mat4 look_at(const Vec3& eye, const Vec3& target);

/// Ring of `frames` cameras at `radius` around `center`, each looking
/// inward with elevation cycling through {-pitch, 0, +pitch}.
std::vector<Mat4> orbit_trajectory(const Vec3& center, double radius, int frames,
                                   double pitch_radians);

/// Embedding anchors on the sphere of the given radius, rejection-sampled
/// until pairwise distances exceed min_separation.
std::vector<Vec3f> draw_anchors(int count, uint64_t seed, double radius = 1.5,
                                double min_separation = 1.0);

/// Closed box room spanning [-extent/2, extent/2] in x/y and [0, extent.z]
/// in z, walls facing inward, instances 0..5 (floor, ceiling, -x, +x, -y,
/// +y). `overlays` picture rectangles (coplanar with distinct walls, higher
/// priority) follow as instances 6.., and `clutter` adds one tilted
/// free-floating slab that carries low planar probability. Anchors and the
/// default orbit trajectory are filled in; callers may replace either.
SyntheticScene make_box_room(const Vec3& extent, int overlays, uint64_t seed,
                             bool clutter = false);

/// Named fixtures: "box6" (six walls + clutter slab, 30 frames),
/// "picture-wall" (six walls + three pictures, 18 frames), "two-rooms"
/// (long room split by a divider slab with a doorway, orbit A -> doorway
/// transit -> orbit B, 30 frames).
SyntheticScene make_preset(const std::string& name, uint64_t seed);

/// Ray-cast one keyframe. Depth is the exact camera-frame z of the nearest
/// front-facing rect plus gaussian noise; planar_prob is 1 on planar rects
/// and 0.1 on clutter; embeddings are the instance anchor plus noise, then
/// rotated by the frame's orthogonal matrix when enabled. Missed pixels get
/// depth 0, prob 0, embedding 0. instance_ids (when given) receives the
/// true instance per pixel, -1 on misses.
Keyframe render_keyframe(const SyntheticScene& scene, int frame,
                         Image<int>* instance_ids = nullptr);

SceneData render_scene(const SyntheticScene& scene);

/// Regular triangle grid over every planar rect, labeled by instance, with
/// per-vertex normals. Grid vertices stay half a cell inside rect borders
/// and cells whose centers fall under a higher-priority coplanar rect
/// (grown by half a cell) are punched out, so instances never touch.
TriMesh ground_truth_mesh(const SyntheticScene& scene, double cell = 0.1);

/// Scene archive (write_scene format) plus gt_mesh.ply under dir.
void write_synthetic_scene(const SyntheticScene& scene, const std::filesystem::path& dir);

}  // namespace planes3d
