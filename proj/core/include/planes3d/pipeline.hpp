#pragma once

#include "planes3d/distill.hpp"
#include "planes3d/grouping.hpp"
#include "planes3d/metrics.hpp"

#include <optional>
#include <string>

namespace planes3d {

/// Knobs for a full run; sub-configs keep their own defaults, seed and
/// use_embeddings here override the grouping sub-config's copies.
struct PipelineConfig {
  double voxel_size = 0.08;
  double truncation_factor = 3.0;  // truncation = factor * voxel_size
  double planar_threshold = 0.25;
  std::string grouping = "ransac";  // "ransac" | "meanshift" (batch mode only)
  bool use_embeddings = true;
  uint64_t seed = 0;
  double box_margin = 0.2;  // scene box growth per side, fraction of extent
  OnlineConfig distill;
  RansacConfig ransac;
  MeanShiftConfig meanshift;
};

/// Wall-clock per keyframe, milliseconds, plus the persistent plane ids
/// alive after that keyframe (online mode).
struct FrameTiming {
  int frame_id = 0;
  double depth_ingest_ms = 0;
  double fusion_ms = 0;
  double mlp_ms = 0;
  double clustering_ms = 0;
  std::vector<int> plane_ids;
};

struct PipelineResult {
  TriMesh mesh;        // planarized, labeled by instance id
  TriMesh extraction;  // raw fused mesh carrying the same labels/embeddings
  std::vector<PlaneInstance> instances;
  std::optional<SceneEmbeddingMlp> mlp;
  SceneBox box;
  std::vector<FrameTiming> timings;  // one per keyframe in online mode
};

/// Batch mode: fuse and distill over all keyframes, then extract once,
/// embed, group (per cfg.grouping), planarize.
PipelineResult run_reconstruct(const SceneData& scene, const PipelineConfig& cfg);

/// Streaming simulation over an on-disk archive: per keyframe re-read the
/// frame (timed as ingest), integrate + re-extract (fusion), distill (mlp),
/// then embed + mean-shift + id tracking (clustering). Labels and instance
/// ids in the result are the tracker's persistent ids.
PipelineResult run_online(const std::string& scene_dir, const PipelineConfig& cfg);

/// Artifact writers shared by the command-line front end and the tests.
void write_labels(const std::string& path, const std::vector<int>& labels);
void write_instances_json(const std::string& path, const std::vector<PlaneInstance>& instances);
void write_report_json(const std::string& path, const EvaluationReport& report);
void write_timings_jsonl(const std::string& path, const std::vector<FrameTiming>& timings);

}  // namespace planes3d
