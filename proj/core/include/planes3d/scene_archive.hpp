#pragma once

#include "planes3d/depth.hpp"
#include "planes3d/geometry.hpp"

#include <string>

namespace planes3d {

/// One posed RGB-D style input frame: metric depth, per-pixel probability of
/// lying on a planar surface, and a 3-channel per-pixel embedding image.
struct Keyframe {
  int frame_id = 0;
  double timestamp = 0.0;  // seconds; archives without timing use the frame id
  CameraPose pose;
  DepthImage depth;
  Image<float> planar_prob;
  Image<Vec3f> embeddings;
};

struct SceneData {
  Mat3 intrinsics = Mat3::Identity();
  std::vector<Keyframe> frames;
};

/// On-disk layout under a scene directory:
///   intrinsics.txt          9 floats, row-major 3x3
///   poses.txt               per line: frame_id + 16 row-major floats
///                           (camera-to-world)
///   frames/NNNNNN.depth.bin 'PDEP' magic, u32 height, u32 width, f32 pixels
///   frames/NNNNNN.prob.bin  same header, f32 pixels
///   frames/NNNNNN.emb.bin   same header, 3 interleaved f32 channels per pixel
void write_scene(const std::string& dir, const SceneData& scene);
SceneData read_scene(const std::string& dir);

/// Frame ids present in poses.txt, ascending.
std::vector<int> list_frame_ids(const std::string& dir);

/// Intrinsics plus the pose table keyed by frame id.
Mat3 read_intrinsics(const std::string& dir);
std::vector<std::pair<int, Mat4>> read_poses(const std::string& dir);

/// Single frame (depth + prob + embeddings + pose).
Keyframe read_frame(const std::string& dir, int frame_id, const Mat3& intrinsics,
                    const Mat4& camera_to_world);

}  // namespace planes3d
