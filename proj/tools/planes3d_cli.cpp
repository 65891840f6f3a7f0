#include "planes3d/mesh_io.hpp"
#include "planes3d/pipeline.hpp"
#include "planes3d/synth.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>

namespace fs = std::filesystem;
using namespace planes3d;

namespace {

struct CommonOpts {
  std::string scene_dir;
  std::string out_dir = "out";
  PipelineConfig cfg;
};

void add_common(CLI::App& cmd, CommonOpts& o) {
  cmd.add_option("--scene", o.scene_dir, "Scene archive directory")->required();
  cmd.add_option("--out", o.out_dir, "Output directory");
  cmd.add_option("--seed", o.cfg.seed, "RNG seed for the whole run");
  cmd.add_option("--voxel-size", o.cfg.voxel_size, "Fusion voxel edge length (m)")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--planar-threshold", o.cfg.planar_threshold,
                 "Fused planar probability below which cubes are skipped");
  cmd.add_option("--grouping", o.cfg.grouping,
                 "Vertex grouping method (online mode always uses meanshift)")
      ->check(CLI::IsMember({"ransac", "meanshift"}));
  cmd.add_flag_callback(
      "--no-embeddings", [&o] { o.cfg.use_embeddings = false; },
      "Geometry-only baseline: skip distillation, gate inliers on distance only");
  cmd.add_option("--t-e", o.cfg.distill.t_e, "Pull threshold on 2D embedding distance");
  cmd.add_option("--t-n", o.cfg.distill.t_n, "Pull threshold on normal agreement");
  cmd.add_option("--t-p", o.cfg.distill.t_p, "Push margin");
  cmd.add_option("--pixels-per-kf", o.cfg.distill.pixels_per_keyframe,
                 "Pixels sampled per keyframe for distillation");
  cmd.add_option("--replay", o.cfg.distill.replay_window, "Keyframes replayed per update");
  cmd.add_option("--steps-per-kf", o.cfg.distill.steps_per_keyframe,
                 "Optimizer steps per keyframe");
  cmd.add_option("--lr", o.cfg.distill.lr, "Optimizer learning rate");
}

void write_common_outputs(const fs::path& out_dir, const PipelineResult& result) {
  fs::create_directories(out_dir);
  write_ply((out_dir / "mesh_planar.ply").string(), result.mesh);
  write_labels((out_dir / "labels.txt").string(), result.mesh.vertex_labels);
  write_instances_json((out_dir / "instances.json").string(), result.instances);
  if (result.mlp) save_checkpoint((out_dir / "mlp.pmlp").string(), *result.mlp);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Plane-instance decomposition of fused depth scenes"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file; command-line flags override it");

  CommonOpts rec, onl;
  CLI::App* c_rec = app.add_subcommand("reconstruct", "Batch: fuse, distill, group, planarize");
  add_common(*c_rec, rec);
  CLI::App* c_onl =
      app.add_subcommand("online", "Streaming: per-keyframe fusion, distillation, "
                                   "mean-shift grouping and id tracking");
  add_common(*c_onl, onl);

  std::string pred_path, gt_path, eval_scene, eval_out = "out";
  uint64_t eval_seed = 0;
  CLI::App* c_eval = app.add_subcommand("evaluate", "Score a labeled mesh against ground truth");
  c_eval->add_option("--pred", pred_path, "Predicted mesh (.ply with plane_id)")->required();
  c_eval->add_option("--gt", gt_path, "Ground-truth mesh (.ply with plane_id)")->required();
  c_eval->add_option("--scene", eval_scene, "Scene archive for the visibility mask")->required();
  c_eval->add_option("--out", eval_out, "Output directory");
  c_eval->add_option("--seed", eval_seed, "Surface sampling seed");

  std::string preset = "box6", synth_out = "out";
  uint64_t synth_seed = 0;
  bool rotate = true;
  double depth_sigma = 0.01, embedding_sigma = 0.05;
  CLI::App* c_synth = app.add_subcommand("synth", "Generate a synthetic scene archive");
  c_synth->add_option("--preset", preset, "box6 | picture-wall | two-rooms")
      ->check(CLI::IsMember({"box6", "picture-wall", "two-rooms"}));
  c_synth->add_option("--seed", synth_seed, "Scene seed");
  c_synth->add_option("--out", synth_out, "Output directory");
  c_synth->add_option("--depth-sigma", depth_sigma, "Depth noise (m)");
  c_synth->add_option("--embedding-sigma", embedding_sigma, "Pixel embedding noise");
  c_synth->add_flag("--rotate-embeddings,!--no-rotate-embeddings", rotate,
                    "Scramble embeddings across frames by per-frame rotations");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_rec->parsed()) {
      const PipelineResult result = run_reconstruct(read_scene(rec.scene_dir), rec.cfg);
      write_common_outputs(rec.out_dir, result);
      std::printf("reconstruct: %zu instances, %zu vertices -> %s\n", result.instances.size(),
                  result.mesh.vertex_count(), rec.out_dir.c_str());
    } else if (c_onl->parsed()) {
      onl.cfg.grouping = "meanshift";  // the only grouping with online tracking
      const PipelineResult result = run_online(onl.scene_dir, onl.cfg);
      write_common_outputs(onl.out_dir, result);
      write_timings_jsonl((fs::path(onl.out_dir) / "timings.jsonl").string(), result.timings);
      std::printf("online: %zu keyframes, %zu instances -> %s\n", result.timings.size(),
                  result.instances.size(), onl.out_dir.c_str());
    } else if (c_eval->parsed()) {
      const TriMesh pred = read_ply(pred_path);
      const TriMesh gt = read_ply(gt_path);
      if (!pred.has_labels()) throw std::runtime_error("predicted mesh lacks plane_id: " + pred_path);
      if (!gt.has_labels()) throw std::runtime_error("ground-truth mesh lacks plane_id: " + gt_path);
      const SceneData scene = read_scene(eval_scene);
      std::vector<const Keyframe*> frames;
      for (const Keyframe& kf : scene.frames) frames.push_back(&kf);
      MetricConfig mc;
      mc.sample_seed = eval_seed;
      const EvaluationReport report = evaluate_meshes(pred, gt, frames, mc);
      fs::create_directories(eval_out);
      const std::string path = (fs::path(eval_out) / "report.json").string();
      write_report_json(path, report);
      std::printf("chamfer %.3f cm  f1 %.4f  voi %.4f  ri %.4f  sc %.4f  planar chamfer %.3f cm\n",
                  report.chamfer, report.f1, report.voi, report.ri, report.sc,
                  report.planar_chamfer);
    } else if (c_synth->parsed()) {
      SyntheticScene scene = make_preset(preset, synth_seed);
      scene.noise.depth_sigma = depth_sigma;
      scene.noise.embedding_sigma = embedding_sigma;
      scene.noise.rotate_embeddings = rotate;
      write_synthetic_scene(scene, synth_out);
      std::printf("synth: %s seed %llu, %zu keyframes, %d instances -> %s\n", preset.c_str(),
                  static_cast<unsigned long long>(synth_seed), scene.trajectory.size(),
                  scene.instance_count, synth_out.c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
