#include <doctest.h>

#include "planes3d/mesh_io.hpp"
#include "planes3d/pipeline.hpp"
#include "planes3d/synth.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sys/wait.h>

using namespace planes3d;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

/// Quarter-resolution box room, six keyframes: enough structure for the
/// pipeline, small enough to run in seconds.
SyntheticScene small_box_scene(uint64_t seed) {
  SyntheticScene scene = make_box_room({3, 3, 2.4}, 0, seed);
  scene.height = 30;
  scene.width = 40;
  scene.intrinsics << 20, 0, 19.5, 0, 20, 14.5, 0, 0, 1;
  scene.trajectory = orbit_trajectory({0, 0, 1.2}, 0.8, 6, 35 * M_PI / 180);
  return scene;
}

/// True when the two labelings induce the same partition (bijective label
/// map, -1 matching -1 exactly).
bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  std::map<int, int> fwd, bwd;
  for (size_t i = 0; i < a.size(); ++i) {
    if ((a[i] == kUnlabeled) != (b[i] == kUnlabeled)) return false;
    if (a[i] == kUnlabeled) continue;
    const auto f = fwd.emplace(a[i], b[i]);
    if (!f.second && f.first->second != b[i]) return false;
    const auto g = bwd.emplace(b[i], a[i]);
    if (!g.second && g.first->second != a[i]) return false;
  }
  return true;
}

int run_cli(const std::string& args, std::string* output = nullptr) {
  const std::string cmd = std::string(PLANES3D_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[512];
  while (fgets(buf, sizeof buf, pipe)) out += buf;
  const int status = pclose(pipe);
  if (output) *output = out;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE(is.good());
  return std::string(std::istreambuf_iterator<char>(is), {});
}

size_t line_count(const fs::path& path) {
  const std::string text = slurp(path);
  return std::count(text.begin(), text.end(), '\n');
}

}  // namespace

TEST_CASE("artifact writers emit parseable files") {
  const fs::path dir = fresh_dir("planes3d_writers_test");

  write_labels((dir / "labels.txt").string(), {3, -1, 0});
  CHECK(slurp(dir / "labels.txt") == "3\n-1\n0\n");

  PlaneInstance inst;
  inst.label = 4;
  inst.plane = {Vec3(0, 0, 1), 2.5};
  inst.mean_embedding = Vec3f(0.5f, -1, 0);
  inst.vertices = {0, 1, 2};
  write_instances_json((dir / "instances.json").string(), {inst});
  const auto arr = nlohmann::json::parse(slurp(dir / "instances.json"));
  REQUIRE(arr.is_array());
  REQUIRE(arr.size() == 1);
  CHECK(arr[0]["id"] == 4);
  CHECK(arr[0]["normal"][2] == 1.0);
  CHECK(arr[0]["offset"] == 2.5);
  CHECK(arr[0]["vertex_count"] == 3);

  EvaluationReport rep;
  rep.chamfer = 1.25;
  rep.ri = 0.75;
  write_report_json((dir / "report.json").string(), rep);
  const auto j = nlohmann::json::parse(slurp(dir / "report.json"));
  for (const char* key : {"chamfer_cm", "f1", "accuracy_cm", "completion_cm", "voi", "ri", "sc",
                          "planar_fidelity_cm", "planar_accuracy_cm", "planar_chamfer_cm"})
    CHECK(j.contains(key));
  CHECK(j["chamfer_cm"] == 1.25);
  CHECK(j["ri"] == 0.75);

  FrameTiming t;
  t.frame_id = 7;
  t.fusion_ms = 3.5;
  t.plane_ids = {0, 2};
  write_timings_jsonl((dir / "timings.jsonl").string(), {t, t});
  std::ifstream is(dir / "timings.jsonl");
  std::string line;
  int lines = 0;
  while (std::getline(is, line)) {
    const auto rec = nlohmann::json::parse(line);
    CHECK(rec["frame_id"] == 7);
    CHECK(rec["fusion_ms"] == 3.5);
    CHECK(rec["plane_ids"] == nlohmann::json({0, 2}));
    ++lines;
  }
  CHECK(lines == 2);

  CHECK_THROWS(write_labels((dir / "missing" / "labels.txt").string(), {1}));
  fs::remove_all(dir);
}

TEST_CASE("pipeline configuration errors surface immediately") {
  SyntheticScene tiny = small_box_scene(1);
  tiny.trajectory.resize(1);
  const SceneData scene = render_scene(tiny);

  CHECK_THROWS(run_reconstruct({}, PipelineConfig{}));

  PipelineConfig bad;
  bad.grouping = "voronoi";
  CHECK_THROWS(run_reconstruct(scene, bad));

  PipelineConfig conflicted;
  conflicted.grouping = "meanshift";
  conflicted.use_embeddings = false;
  CHECK_THROWS(run_reconstruct(scene, conflicted));

  PipelineConfig no_emb;
  no_emb.use_embeddings = false;
  CHECK_THROWS(run_online("/nonexistent", no_emb));
}

TEST_CASE("run_reconstruct is deterministic under a fixed seed") {
  const SceneData scene = render_scene(small_box_scene(5));
  PipelineConfig cfg;
  cfg.voxel_size = 0.12;
  cfg.seed = 42;

  const PipelineResult a = run_reconstruct(scene, cfg);
  const PipelineResult b = run_reconstruct(scene, cfg);
  REQUIRE(a.mesh.vertex_count() == b.mesh.vertex_count());
  CHECK(a.mesh.vertex_labels == b.mesh.vertex_labels);
  CHECK(a.extraction.vertex_labels == b.extraction.vertex_labels);
  REQUIRE(a.instances.size() == b.instances.size());
  for (size_t k = 0; k < a.instances.size(); ++k) {
    CHECK(a.instances[k].plane.normal == b.instances[k].plane.normal);
    CHECK(a.instances[k].plane.offset == b.instances[k].plane.offset);
    CHECK(a.instances[k].vertices == b.instances[k].vertices);
  }
  CHECK(a.mlp.has_value());
  CHECK(a.mlp->params() == b.mlp->params());

  // a different seed must change something downstream
  cfg.seed = 43;
  const PipelineResult c = run_reconstruct(scene, cfg);
  CHECK(c.mlp->params() != a.mlp->params());
}

TEST_CASE("online processing ends at the batch mean-shift result, ids remapped") {
  const fs::path dir = fresh_dir("planes3d_online_eq_test");
  write_synthetic_scene(small_box_scene(6), dir);

  PipelineConfig cfg;
  cfg.voxel_size = 0.12;
  cfg.grouping = "meanshift";
  cfg.seed = 3;

  const PipelineResult online = run_online(dir.string(), cfg);
  const PipelineResult batch = run_reconstruct(read_scene(dir.string()), cfg);

  REQUIRE(online.extraction.vertex_count() == batch.extraction.vertex_count());
  for (size_t v = 0; v < online.extraction.vertex_count(); v += 97)
    CHECK(online.extraction.vertices[v] == batch.extraction.vertices[v]);
  CHECK(same_partition(online.extraction.vertex_labels, batch.extraction.vertex_labels));
  CHECK(online.instances.size() == batch.instances.size());
  CHECK(online.timings.size() == 6);

  // the final keyframe's live ids are exactly the instance labels
  std::set<int> live(online.timings.back().plane_ids.begin(),
                     online.timings.back().plane_ids.end());
  std::set<int> labels;
  for (const PlaneInstance& inst : online.instances) labels.insert(inst.label);
  CHECK(live == labels);
  fs::remove_all(dir);
}

TEST_CASE("replaying one static keyframe keeps plane ids settled") {
  SyntheticScene scene = small_box_scene(8);
  const Keyframe base = render_keyframe(scene, 0);
  SceneData data;
  data.intrinsics = scene.intrinsics;
  for (int i = 0; i < 7; ++i) {
    Keyframe kf = base;
    kf.frame_id = i;
    kf.timestamp = i;
    data.frames.push_back(std::move(kf));
  }
  const fs::path dir = fresh_dir("planes3d_static_test");
  write_scene(dir.string(), data);

  PipelineConfig cfg;
  cfg.voxel_size = 0.12;
  const PipelineResult result = run_online(dir.string(), cfg);
  REQUIRE(result.timings.size() == 7);
  // clustering may still be forming while the net trains; once formed the
  // tracker must hold ids fixed on identical geometry
  const auto& final_ids = result.timings.back().plane_ids;
  CHECK_FALSE(final_ids.empty());
  for (size_t i = 4; i < result.timings.size(); ++i)
    CHECK(result.timings[i].plane_ids == final_ids);
  fs::remove_all(dir);
}

TEST_CASE("a plane entering view mid-sequence gets a fresh id, old ids hold") {
  SyntheticScene scene;
  scene.seed = 4;
  scene.rotation_seed = 5;
  scene.height = 30;
  scene.width = 40;
  scene.intrinsics << 20, 0, 19.5, 0, 20, 14.5, 0, 0, 1;
  // wall A ahead (+x), wall B to the left (+y); B stays hidden behind A's
  // edge until the camera turns toward the corner
  scene.rects.push_back({0, Vec3(2, 0, 1.2), Vec3::UnitZ(), Vec3::UnitY(), 1.1, 1.6});
  scene.rects.push_back({1, Vec3(0, 2, 1.2), Vec3::UnitX(), Vec3::UnitZ(), 1.6, 1.1});
  CHECK(scene.rects[0].normal() == -Vec3::UnitX());
  CHECK(scene.rects[1].normal() == -Vec3::UnitY());
  scene.instance_count = 2;
  scene.anchors = draw_anchors(2, mix_seed(4, 0));
  const Vec3 eye(0, 0, 1.2);
  for (int i = 0; i < 3; ++i) scene.trajectory.push_back(look_at(eye, Vec3(2, 0, 1.2)));
  for (int i = 0; i < 5; ++i) scene.trajectory.push_back(look_at(eye, Vec3(1.4, 1.4, 1.2)));

  const fs::path dir = fresh_dir("planes3d_newplane_test");
  write_synthetic_scene(scene, dir);

  PipelineConfig cfg;
  cfg.voxel_size = 0.12;
  cfg.distill.steps_per_keyframe = 40;
  const PipelineResult result = run_online(dir.string(), cfg);
  REQUIRE(result.timings.size() == 8);

  std::set<int> early;
  for (int i = 0; i < 3; ++i)
    early.insert(result.timings[i].plane_ids.begin(), result.timings[i].plane_ids.end());
  const auto& final_ids = result.timings.back().plane_ids;
  REQUIRE(final_ids.size() >= 2);

  // every id alive before the turn is still alive at the end...
  for (int id : result.timings[2].plane_ids)
    CHECK(std::count(final_ids.begin(), final_ids.end(), id) == 1);
  // ...and the new wall arrived under an id never seen early
  bool fresh = false;
  for (int id : final_ids) fresh |= early.count(id) == 0;
  CHECK(fresh);
  fs::remove_all(dir);
}

TEST_CASE("command line round trip: synth, reconstruct, evaluate, online") {
  const fs::path root = fresh_dir("planes3d_cli_test");
  const fs::path scene_dir = root / "scene";
  write_synthetic_scene(small_box_scene(9), scene_dir);

  std::string out;

  SUBCASE("synth emits byte-identical archives for one seed") {
    const fs::path a = root / "synth_a", b = root / "synth_b";
    CHECK(run_cli("synth --preset picture-wall --seed 4 --out " + a.string(), &out) == 0);
    CHECK(run_cli("synth --preset picture-wall --seed 4 --out " + b.string(), &out) == 0);
    for (const char* rel :
         {"intrinsics.txt", "poses.txt", "gt_mesh.ply", "frames/000007.depth.bin",
          "frames/000007.emb.bin", "frames/000007.prob.bin"})
      CHECK(slurp(a / rel) == slurp(b / rel));
    CHECK(run_cli("synth --preset nowhere --out " + a.string(), &out) != 0);
  }

  SUBCASE("reconstruct, evaluate and online write the advertised artifacts") {
    const fs::path rec = root / "rec";
    const std::string common = " --scene " + scene_dir.string() + " --voxel-size 0.12 --seed 3";
    REQUIRE(run_cli("reconstruct" + common + " --grouping meanshift --out " + rec.string(),
                    &out) == 0);
    const TriMesh mesh = read_ply((rec / "mesh_planar.ply").string());
    CHECK(mesh.vertex_count() > 0);
    CHECK(line_count(rec / "labels.txt") == mesh.vertex_count());
    const auto instances = nlohmann::json::parse(slurp(rec / "instances.json"));
    REQUIRE(instances.is_array());
    CHECK_FALSE(instances.empty());
    for (const auto& inst : instances) {
      CHECK(inst.contains("id"));
      CHECK(inst["normal"].size() == 3);
      CHECK(inst.contains("offset"));
      CHECK(inst["vertex_count"].get<int>() > 0);
    }
    CHECK(fs::exists(rec / "mlp.pmlp"));

    const fs::path ev = root / "eval";
    REQUIRE(run_cli("evaluate --pred " + (rec / "mesh_planar.ply").string() + " --gt " +
                        (scene_dir / "gt_mesh.ply").string() + " --scene " + scene_dir.string() +
                        " --out " + ev.string(),
                    &out) == 0);
    const auto report = nlohmann::json::parse(slurp(ev / "report.json"));
    CHECK(report["ri"].get<double>() >= 0.0);
    CHECK(report["ri"].get<double>() <= 1.0);
    CHECK(report["chamfer_cm"].get<double>() >= 0.0);
    CHECK(report["voi"].get<double>() >= 0.0);

    // gt without labels is rejected
    const TriMesh bare = [&] {
      TriMesh m = read_ply((scene_dir / "gt_mesh.ply").string());
      m.vertex_labels.clear();
      return m;
    }();
    write_ply((root / "bare.ply").string(), bare);
    CHECK(run_cli("evaluate --pred " + (rec / "mesh_planar.ply").string() + " --gt " +
                      (root / "bare.ply").string() + " --scene " + scene_dir.string(),
                  &out) != 0);
    CHECK(out.find("plane_id") != std::string::npos);

    const fs::path onl = root / "onl";
    REQUIRE(run_cli("online" + common + " --out " + onl.string(), &out) == 0);
    CHECK(line_count(onl / "timings.jsonl") == 6);
    std::ifstream is(onl / "timings.jsonl");
    std::string line;
    int frame = 0;
    while (std::getline(is, line)) {
      const auto rec_j = nlohmann::json::parse(line);
      CHECK(rec_j["frame_id"].get<int>() == frame++);
      for (const char* key : {"depth_ingest_ms", "fusion_ms", "mlp_ms", "clustering_ms"})
        CHECK(rec_j[key].get<double>() >= 0.0);
      CHECK(rec_j["plane_ids"].is_array());
    }

    // --grouping is accepted in online mode but the result is mean-shift's
    const fs::path onl2 = root / "onl2";
    REQUIRE(run_cli("online" + common + " --grouping ransac --out " + onl2.string(), &out) == 0);
    CHECK(slurp(onl2 / "labels.txt") == slurp(onl / "labels.txt"));
  }

  SUBCASE("a config file mirrors the flags and loses to them") {
    const fs::path flag_out = root / "flags";
    REQUIRE(run_cli("reconstruct --scene " + scene_dir.string() +
                        " --voxel-size 0.12 --seed 3 --grouping meanshift --out " +
                        flag_out.string(),
                    &out) == 0);

    const fs::path cfg_path = root / "run.cfg";
    std::ofstream(cfg_path) << "[reconstruct]\nvoxel-size=0.12\nseed=3\ngrouping=meanshift\n";
    const fs::path cfg_out = root / "from_config";
    REQUIRE(run_cli("--config " + cfg_path.string() + " reconstruct --scene " +
                        scene_dir.string() + " --out " + cfg_out.string(),
                    &out) == 0);
    CHECK(slurp(cfg_out / "labels.txt") == slurp(flag_out / "labels.txt"));

    const fs::path cfg2_path = root / "run2.cfg";
    std::ofstream(cfg2_path) << "[reconstruct]\nvoxel-size=0.3\nseed=9\ngrouping=ransac\n";
    const fs::path override_out = root / "override";
    REQUIRE(run_cli("--config " + cfg2_path.string() + " reconstruct --scene " +
                        scene_dir.string() +
                        " --voxel-size 0.12 --seed 3 --grouping meanshift --out " +
                        override_out.string(),
                    &out) == 0);
    CHECK(slurp(override_out / "labels.txt") == slurp(flag_out / "labels.txt"));
  }

  SUBCASE("a corrupted archive fails loudly, naming the bad file") {
    const fs::path bad = root / "bad_scene";
    fs::copy(scene_dir, bad, fs::copy_options::recursive);
    std::fstream f(bad / "frames" / "000002.depth.bin",
                   std::ios::in | std::ios::out | std::ios::binary);
    f.write("XXXX", 4);
    f.close();
    CHECK(run_cli("reconstruct --scene " + bad.string() + " --out " + (root / "x").string(),
                  &out) != 0);
    CHECK(out.find("000002.depth.bin") != std::string::npos);

    CHECK(run_cli("reconstruct --scene " + (root / "void").string(), &out) != 0);
  }

  fs::remove_all(root);
}
