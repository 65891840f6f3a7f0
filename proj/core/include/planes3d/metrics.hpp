#pragma once

#include "planes3d/geometry.hpp"
#include "planes3d/scene_archive.hpp"

namespace planes3d {

struct MetricConfig {
  int n_sample_points = 200000;
  double f1_threshold = 0.05;    // meters
  int k_planes = 20;             // ground-truth planes entering planar metrics
  double visibility_margin = 0.05;  // meters behind the observed surface
  uint64_t sample_seed = 0;
};

struct ChamferResult {
  double accuracy = 0.0;    // mean pred-to-gt distance (m)
  double completion = 0.0;  // mean gt-to-pred distance (m)
  double chamfer = 0.0;     // (accuracy + completion) / 2
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Symmetric point-distance metrics. An empty side drives its distances to
/// +inf and f1 to 0.
ChamferResult chamfer_f1(const PointCloud& pred, const PointCloud& gt, double f1_threshold);

/// Keep flag per point: visible when at least one keyframe sees it inside
/// the image, in front of the camera, and no deeper than the observed depth
/// plus margin.
std::vector<uint8_t> visibility_mask(const std::vector<Vec3>& points,
                                     const std::vector<const Keyframe*>& frames, double margin);

PointCloud filter_visible(const PointCloud& cloud, const std::vector<const Keyframe*>& frames,
                          double margin);

/// Label per gt vertex, copied from the nearest predicted vertex (ties take
/// the lowest predicted vertex index). All -1 when the prediction is empty.
std::vector<int> transfer_labels(const TriMesh& pred, const TriMesh& gt);

struct SegmentationResult {
  double voi = 0.0;  // variation of information, natural log
  double ri = 0.0;   // rand index
  double sc = 0.0;   // covering of gt regions by predicted regions
};

/// Both label arrays aligned and >= 0 everywhere; callers drop unassigned
/// entries beforehand.
SegmentationResult segmentation_metrics(const std::vector<int>& pred_labels,
                                        const std::vector<int>& gt_labels);

struct PlanarResult {
  double fidelity = 0.0;  // mean over matched gt planes of gt-to-pred distance (m)
  double accuracy = 0.0;  // mean over the same matches of pred-to-gt distance (m)
  double chamfer = 0.0;   // mean of the two
};

/// Each of the k largest gt planes (by point count) is matched to the
/// predicted plane covering it best (minimum mean gt-to-pred distance);
/// matching may reuse predicted planes. No predicted planes -> +inf sentinel.
PlanarResult planar_metrics(const std::vector<std::vector<Vec3>>& pred_planes,
                            const std::vector<std::vector<Vec3>>& gt_planes, int k_planes);

/// Full evaluation protocol; distances are reported in centimeters. Field
/// names match the JSON report emitted by the CLI.
struct EvaluationReport {
  double chamfer = 0.0;  // cm
  double f1 = 0.0;
  double accuracy = 0.0;    // cm
  double completion = 0.0;  // cm
  double voi = 0.0;
  double ri = 0.0;
  double sc = 0.0;
  double planar_fidelity = 0.0;  // cm
  double planar_accuracy = 0.0;  // cm
  double planar_chamfer = 0.0;   // cm
};

/// Runs the whole protocol: area-weighted sampling with ambiguous faces
/// masked, visibility filtering of both clouds against the keyframes,
/// chamfer/F1, label transfer onto visible gt vertices followed by VOI/RI/SC
/// over the doubly-labeled subset, and planar metrics over per-instance
/// vertex sets. Both meshes must carry labels.
EvaluationReport evaluate_meshes(const TriMesh& pred, const TriMesh& gt,
                                 const std::vector<const Keyframe*>& frames,
                                 const MetricConfig& cfg);

}  // namespace planes3d
