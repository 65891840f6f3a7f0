#pragma once

#include "planes3d/geometry.hpp"

namespace planes3d {

struct PlaneInstance {
  int label = kUnlabeled;
  Plane plane;
  Vec3f mean_embedding = Vec3f::Zero();
  Vec3 mean_normal = Vec3::UnitZ();  // unit mean of member vertex normals
  std::vector<int> vertices;
};

struct RansacConfig {
  double r_d = 0.1;               // point-to-plane inlier radius (m)
  double r_e = 0.5;               // embedding distance to the seed's embedding
  int min_vertices = 100;
  int proposals_per_round = 256;
  int max_iterations = 64;        // committed planes cap
  double merge_embedding = 0.2;   // merge when mean embeddings sit closer...
  double merge_normal_dot = 0.6;  // ...and normals agree beyond this
  bool use_embeddings = true;     // false = geometry-only baseline, no merge pass
  uint64_t seed = 0;
};

struct MeanShiftConfig {
  double bandwidth = 0.25;  // flat kernel radius in embedding space
  double tolerance = 1e-4;
  int max_iterations = 200;
  int min_vertices = 100;
};

/// Least-squares plane through the points (smallest covariance eigenvector,
/// offset through the centroid). The normal flips to agree with orient_hint
/// when the hint is nonzero; otherwise the sign is whatever the solver
/// returns. Throws on fewer than three points and on collinear/degenerate
/// input (mid covariance eigenvalue vanishing relative to the largest).
Plane fit_plane(const std::vector<Vec3>& points, const Vec3& orient_hint = Vec3::Zero());

/// Same fit over the listed mesh vertices; the hint is the mean vertex
/// normal when the mesh carries normals.
Plane fit_plane(const TriMesh& mesh, const std::vector<int>& vertices);

/// One PlaneInstance per compact label (plane fit + mean embedding/normal).
std::vector<PlaneInstance> build_instances(const TriMesh& mesh, int label_count);

/// Membership test for one vertex against a plane proposal: the point must
/// sit within r_d of the plane and, when embeddings gate, within r_e of the
/// proposal's embedding.
bool is_inlier(const Vec3& position, const Vec3f& embedding, const Plane& proposal,
               const Vec3f& proposal_embedding, const RansacConfig& cfg);

/// Transitively merge instances whose mean embeddings sit closer than
/// merge_embedding while their mean normals agree beyond merge_normal_dot.
/// Each merged group keeps the lowest participating label; mesh labels are
/// rewritten and compacted, and surviving instances are refit.
std::vector<PlaneInstance> merge_planes(TriMesh& mesh, std::vector<PlaneInstance> instances,
                                        double merge_embedding, double merge_normal_dot);

/// Greedy multi-plane extraction. Each round scores proposals_per_round
/// single-vertex proposals (the vertex normal spans the plane, its embedding
/// gates inliers when use_embeddings) against the unassigned pool and commits
/// the best one when it clears min_vertices. Committed planes whose mean
/// embeddings and normals agree get merged, labels are split into connected
/// components, grown into unassigned vertices, and instances below
/// min_vertices are dropped. Labels land on the mesh; instances are returned.
std::vector<PlaneInstance> sequential_ransac(TriMesh& mesh, const RansacConfig& cfg);

/// Mode seeking over the per-vertex embeddings with a flat kernel: every
/// occupied grid cell (cell edge = bandwidth) seeds an iteration, converged
/// modes closer than bandwidth/2 collapse into the better-supported one, and
/// every vertex joins its nearest mode. The same connectivity / growth /
/// min-size pipeline as sequential_ransac then shapes the final instances.
std::vector<PlaneInstance> mean_shift_grouping(TriMesh& mesh, const MeanShiftConfig& cfg);

}  // namespace planes3d
