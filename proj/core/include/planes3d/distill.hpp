#pragma once

#include "planes3d/embedding_mlp.hpp"
#include "planes3d/scene_archive.hpp"

namespace planes3d {

struct OnlineConfig {
  int pixels_per_keyframe = 400;
  int pairs_per_keyframe = 400;
  int replay_window = 10;  // keyframes kept for replay, newest included
  int steps_per_keyframe = 10;
  float lr = 1e-3f;
  float t_e = 0.9f;  // pull when 2D embedding distance stays below this
  float t_n = 0.8f;  // ... and the normal dot product exceeds this
  float t_p = 1.0f;  // push margin
};

/// Bounds of everything observed: camera centers plus every valid depth
/// sample back-projected to world (subsampled by stride), grown by
/// margin_fraction of the extent on each side. Fixes both the fusion volume
/// and the network input normalization for a whole run, so both replay modes
/// compute it from the archive up front.
SceneBox scene_box_from_frames(const SceneData& scene, double margin_fraction = 0.2,
                               int stride = 2);

/// One distillation round for a freshly arrived keyframe. window holds the
/// replay keyframes in arrival order with the new keyframe last. Per
/// keyframe, pixels_per_keyframe pixels with valid depth-based normals are
/// drawn and pairs_per_keyframe pairs are formed among them; a pair pulls
/// when its 2D embeddings sit closer than t_e and its normals agree beyond
/// t_n, and pushes otherwise. The combined batch is fixed, then
/// steps_per_keyframe Adam steps run on it. Returns the last step's loss; a
/// no-op returning 0 when the new keyframe has fewer than two usable pixels.
/// branch_log, when given, receives one pull/push flag per formed pair.
float online_update(SceneEmbeddingMlp& mlp, AdamState<float>& adam,
                    const std::vector<const Keyframe*>& window, const SceneBox& box,
                    const OnlineConfig& cfg, uint64_t seed,
                    std::vector<uint8_t>* branch_log = nullptr);

/// Evaluate the network at every vertex and store the embeddings on the mesh.
void embed_mesh(TriMesh& mesh, const SceneEmbeddingMlp& mlp, const SceneBox& box);

}  // namespace planes3d
