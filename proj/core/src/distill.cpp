#include "planes3d/distill.hpp"

#include <random>

namespace planes3d {

SceneBox scene_box_from_frames(const SceneData& scene, double margin_fraction, int stride) {
  if (scene.frames.empty()) throw std::runtime_error("scene_box_from_frames: no keyframes");
  if (stride < 1) throw std::invalid_argument("scene_box_from_frames: stride must be >= 1");
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  auto grow = [&](const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  };
  bool any_depth = false;
  for (const Keyframe& kf : scene.frames) {
    grow(kf.pose.translation());
    for (int v = 0; v < kf.depth.height; v += stride)
      for (int u = 0; u < kf.depth.width; u += stride) {
        const float d = kf.depth(v, u);
        if (!depth_valid(d)) continue;
        grow(kf.pose.to_world(unproject_pixel(kf.pose.intrinsics, u, v, d)));
        any_depth = true;
      }
  }
  if (!any_depth) throw std::runtime_error("scene_box_from_frames: no valid depth anywhere");
  const Vec3 margin = margin_fraction * (hi - lo).cwiseMax(1e-3);
  return {lo - margin, hi + margin};
}

namespace {

struct FrameSamples {
  NormalMap nm;
  std::vector<int> valid;  // flat indices of pixels with a depth-based normal
};

FrameSamples frame_samples(const Keyframe& kf) {
  FrameSamples s{normals_from_depth(kf.depth, kf.pose.intrinsics), {}};
  for (int i = 0; i < static_cast<int>(s.nm.valid.size()); ++i)
    if (s.nm.valid[i]) s.valid.push_back(i);
  return s;
}

}  // namespace

float online_update(SceneEmbeddingMlp& mlp, AdamState<float>& adam,
                    const std::vector<const Keyframe*>& window, const SceneBox& box,
                    const OnlineConfig& cfg, uint64_t seed,
                    std::vector<uint8_t>* branch_log) {
  if (window.empty()) throw std::runtime_error("online_update: empty window");
  if (frame_samples(*window.back()).valid.size() < 2) return 0.0f;

  using MatX = SceneEmbeddingMlp::MatX;
  std::mt19937_64 rng(seed);
  std::vector<Eigen::Vector3f> points;
  std::vector<std::pair<int, int>> pairs;
  std::vector<uint8_t> pull;

  for (const Keyframe* kf : window) {
    const FrameSamples fs = frame_samples(*kf);
    if (fs.valid.size() < 2) continue;

    const int base = static_cast<int>(points.size());
    std::vector<Vec3> normal;
    std::vector<Vec3f> emb2d;
    std::uniform_int_distribution<size_t> pick(0, fs.valid.size() - 1);
    for (int s = 0; s < cfg.pixels_per_keyframe; ++s) {
      const int flat = fs.valid[pick(rng)];
      const int v = flat / kf->depth.width, u = flat % kf->depth.width;
      const Vec3 p_world =
          kf->pose.to_world(unproject_pixel(kf->pose.intrinsics, u, v, kf->depth(v, u)));
      points.push_back(box.normalize(p_world).cast<float>());
      normal.push_back(fs.nm.normals[flat]);
      emb2d.push_back(kf->embeddings.data[flat]);
    }

    std::uniform_int_distribution<int> pick_sample(0, cfg.pixels_per_keyframe - 1);
    for (int t = 0; t < cfg.pairs_per_keyframe; ++t) {
      const int a = pick_sample(rng);
      int b = pick_sample(rng);
      while (b == a) b = pick_sample(rng);
      pairs.emplace_back(base + a, base + b);
      const bool same_surface = (emb2d[a] - emb2d[b]).norm() < cfg.t_e &&
                                normal[a].dot(normal[b]) > cfg.t_n;
      pull.push_back(same_surface ? 1 : 0);
    }
  }
  if (branch_log) branch_log->insert(branch_log->end(), pull.begin(), pull.end());
  if (pairs.empty()) return 0.0f;

  MatX batch(static_cast<int>(points.size()), 3);
  for (int i = 0; i < batch.rows(); ++i) batch.row(i) = points[i].transpose();

  adam.lr = cfg.lr;
  float loss = 0.0f;
  SceneEmbeddingMlp::VecX grad;
  for (int s = 0; s < cfg.steps_per_keyframe; ++s) {
    loss = pair_loss_and_grad(mlp, batch, pairs, pull, cfg.t_p, &grad);
    adam_step(mlp, grad, adam);
  }
  return loss;
}

void embed_mesh(TriMesh& mesh, const SceneEmbeddingMlp& mlp, const SceneBox& box) {
  using MatX = SceneEmbeddingMlp::MatX;
  mesh.vertex_embeddings.assign(mesh.vertex_count(), Vec3f::Zero());
  if (mesh.vertices.empty()) return;
  MatX pts(static_cast<int>(mesh.vertex_count()), 3);
  for (size_t i = 0; i < mesh.vertex_count(); ++i)
    pts.row(static_cast<int>(i)) = box.normalize(mesh.vertices[i]).cast<float>().transpose();
  const MatX emb = mlp.forward(pts);
  for (size_t i = 0; i < mesh.vertex_count(); ++i)
    mesh.vertex_embeddings[i] = emb.row(static_cast<int>(i)).transpose();
}

}  // namespace planes3d
