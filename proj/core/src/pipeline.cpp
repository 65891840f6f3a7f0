#include "planes3d/pipeline.hpp"

#include "planes3d/assignment.hpp"
#include "planes3d/planarize.hpp"
#include "planes3d/tsdf.hpp"

#include <json.hpp>

#include <chrono>
#include <deque>
#include <fstream>

namespace planes3d {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

RansacConfig ransac_config(const PipelineConfig& cfg) {
  RansacConfig rc = cfg.ransac;
  rc.use_embeddings = cfg.use_embeddings;
  rc.seed = mix_seed(cfg.seed, 0x5a5a);
  return rc;
}

std::vector<PlaneInstance> group(TriMesh& mesh, const PipelineConfig& cfg) {
  if (cfg.grouping == "ransac") return sequential_ransac(mesh, ransac_config(cfg));
  if (cfg.grouping == "meanshift") {
    if (!cfg.use_embeddings)
      throw std::invalid_argument("mean-shift grouping needs embeddings enabled");
    return mean_shift_grouping(mesh, cfg.meanshift);
  }
  throw std::invalid_argument("unknown grouping method '" + cfg.grouping + "'");
}

/// Update the network on the newest keyframe; window holds older frames.
float distill_step(SceneEmbeddingMlp& mlp, AdamState<float>& adam,
                   std::deque<const Keyframe*>& replay, const Keyframe& kf, const SceneBox& box,
                   const PipelineConfig& cfg, int keyframe_index) {
  std::vector<const Keyframe*> window(replay.begin(), replay.end());
  window.push_back(&kf);
  const float loss = online_update(mlp, adam, window, box, cfg.distill,
                                   mix_seed(cfg.seed, 0x1000 + keyframe_index));
  replay.push_back(&kf);
  while (static_cast<int>(replay.size()) > cfg.distill.replay_window) replay.pop_front();
  return loss;
}

}  // namespace

PipelineResult run_reconstruct(const SceneData& scene, const PipelineConfig& cfg) {
  if (scene.frames.empty()) throw std::runtime_error("run_reconstruct: scene has no frames");

  PipelineResult out;
  out.box = scene_box_from_frames(scene, cfg.box_margin);
  TsdfVolume volume = TsdfVolume::from_bounds(out.box.lo, out.box.hi, cfg.voxel_size,
                                              cfg.truncation_factor * cfg.voxel_size);

  std::optional<SceneEmbeddingMlp> mlp;
  AdamState<float> adam;
  std::deque<const Keyframe*> replay;
  if (cfg.use_embeddings) mlp.emplace(mix_seed(cfg.seed, 0x3d1));

  int index = 0;
  for (const Keyframe& kf : scene.frames) {
    volume.integrate(kf.depth, kf.planar_prob, kf.pose);
    if (mlp) distill_step(*mlp, adam, replay, kf, out.box, cfg, index);
    ++index;
  }

  out.extraction = volume.extract_mesh(cfg.planar_threshold);
  if (mlp) embed_mesh(out.extraction, *mlp, out.box);
  out.instances = group(out.extraction, cfg);
  out.mesh = planarize(out.extraction, out.instances);
  out.mlp = std::move(mlp);
  return out;
}

PipelineResult run_online(const std::string& scene_dir, const PipelineConfig& cfg) {
  if (!cfg.use_embeddings)
    throw std::invalid_argument("run_online: online grouping needs embeddings enabled");

  // The scene box must hold for the whole run (it fixes the fusion volume and
  // the network input scaling), so it comes from a full pre-pass; the
  // per-keyframe loop then re-reads each frame as its ingest step.
  const SceneData scene = read_scene(scene_dir);
  if (scene.frames.empty()) throw std::runtime_error("run_online: scene has no frames");

  PipelineResult out;
  out.box = scene_box_from_frames(scene, cfg.box_margin);
  TsdfVolume volume = TsdfVolume::from_bounds(out.box.lo, out.box.hi, cfg.voxel_size,
                                              cfg.truncation_factor * cfg.voxel_size);

  SceneEmbeddingMlp mlp(mix_seed(cfg.seed, 0x3d1));
  AdamState<float> adam;
  std::deque<const Keyframe*> replay;
  std::deque<Keyframe> replay_storage;
  PlaneTracker tracker;

  TriMesh mesh;
  std::vector<PlaneInstance> instances;
  std::vector<int> ids;

  int index = 0;
  for (const Keyframe& archived : scene.frames) {
    FrameTiming t;
    t.frame_id = archived.frame_id;

    auto t0 = Clock::now();
    const Keyframe kf =
        read_frame(scene_dir, archived.frame_id, scene.intrinsics, archived.pose.camera_to_world);
    t.depth_ingest_ms = ms_since(t0);

    t0 = Clock::now();
    volume.integrate(kf.depth, kf.planar_prob, kf.pose);
    std::vector<int64_t> edge_keys;
    mesh = volume.extract_mesh(cfg.planar_threshold, &edge_keys);
    t.fusion_ms = ms_since(t0);

    t0 = Clock::now();
    replay_storage.push_back(kf);  // keep alive; replay points into this
    distill_step(mlp, adam, replay, replay_storage.back(), out.box, cfg, index);
    while (static_cast<int>(replay_storage.size()) > cfg.distill.replay_window + 1)
      replay_storage.pop_front();
    t.mlp_ms = ms_since(t0);

    t0 = Clock::now();
    embed_mesh(mesh, mlp, out.box);
    instances = mean_shift_grouping(mesh, cfg.meanshift);
    std::vector<std::vector<int64_t>> keys(instances.size());
    for (size_t k = 0; k < instances.size(); ++k)
      for (int v : instances[k].vertices) keys[k].push_back(edge_keys[v]);
    ids = tracker.update(keys);
    t.clustering_ms = ms_since(t0);

    t.plane_ids = ids;
    out.timings.push_back(std::move(t));
    ++index;
  }

  out.mesh = planarize(mesh, instances);
  for (int& lab : out.mesh.vertex_labels) lab = ids[lab];
  for (int& lab : mesh.vertex_labels)
    if (lab != kUnlabeled) lab = ids[lab];
  for (size_t k = 0; k < instances.size(); ++k) instances[k].label = ids[k];
  out.extraction = std::move(mesh);
  out.instances = std::move(instances);
  out.mlp = std::move(mlp);
  return out;
}

void write_labels(const std::string& path, const std::vector<int>& labels) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_labels: cannot open " + path);
  for (int lab : labels) os << lab << '\n';
  if (!os) throw std::runtime_error("write_labels: write failed for " + path);
}

void write_instances_json(const std::string& path, const std::vector<PlaneInstance>& instances) {
  nlohmann::json arr = nlohmann::json::array();
  for (const PlaneInstance& inst : instances) {
    arr.push_back({{"id", inst.label},
                   {"normal", {inst.plane.normal.x(), inst.plane.normal.y(), inst.plane.normal.z()}},
                   {"offset", inst.plane.offset},
                   {"vertex_count", inst.vertices.size()},
                   {"mean_embedding",
                    {inst.mean_embedding.x(), inst.mean_embedding.y(), inst.mean_embedding.z()}}});
  }
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_instances_json: cannot open " + path);
  os << arr.dump(2) << '\n';
}

void write_report_json(const std::string& path, const EvaluationReport& r) {
  const nlohmann::json j = {{"chamfer_cm", r.chamfer},
                            {"f1", r.f1},
                            {"accuracy_cm", r.accuracy},
                            {"completion_cm", r.completion},
                            {"voi", r.voi},
                            {"ri", r.ri},
                            {"sc", r.sc},
                            {"planar_fidelity_cm", r.planar_fidelity},
                            {"planar_accuracy_cm", r.planar_accuracy},
                            {"planar_chamfer_cm", r.planar_chamfer}};
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_report_json: cannot open " + path);
  os << j.dump(2) << '\n';
}

void write_timings_jsonl(const std::string& path, const std::vector<FrameTiming>& timings) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_timings_jsonl: cannot open " + path);
  for (const FrameTiming& t : timings) {
    const nlohmann::json j = {{"frame_id", t.frame_id},
                              {"depth_ingest_ms", t.depth_ingest_ms},
                              {"fusion_ms", t.fusion_ms},
                              {"mlp_ms", t.mlp_ms},
                              {"clustering_ms", t.clustering_ms},
                              {"plane_ids", t.plane_ids}};
    os << j.dump() << '\n';
  }
}

}  // namespace planes3d
