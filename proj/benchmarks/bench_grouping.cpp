#include "planes3d/grouping.hpp"
#include "planes3d/synth.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace planes3d;

namespace {

// ~50k-vertex labeled room mesh with per-vertex anchor embeddings.
TriMesh grouping_fixture() {
  const SyntheticScene scene = make_preset("box6", 7);
  TriMesh mesh = ground_truth_mesh(scene, 0.03);
  std::mt19937_64 rng(11);
  std::normal_distribution<float> noise(0.0f, 0.05f);
  mesh.vertex_embeddings.resize(mesh.vertex_count());
  for (size_t v = 0; v < mesh.vertex_count(); ++v)
    mesh.vertex_embeddings[v] = scene.anchors[mesh.vertex_labels[v]] +
                                Vec3f(noise(rng), noise(rng), noise(rng));
  return mesh;
}

}  // namespace

static void BM_SequentialRansac(benchmark::State& state) {
  const TriMesh base = grouping_fixture();
  RansacConfig cfg;
  cfg.seed = 3;
  for (auto _ : state) {
    TriMesh mesh = base;
    benchmark::DoNotOptimize(sequential_ransac(mesh, cfg));
  }
  state.counters["vertices"] = static_cast<double>(base.vertex_count());
}
BENCHMARK(BM_SequentialRansac)->Unit(benchmark::kMillisecond);

static void BM_MeanShift(benchmark::State& state) {
  const TriMesh base = grouping_fixture();
  const MeanShiftConfig cfg;
  for (auto _ : state) {
    TriMesh mesh = base;
    benchmark::DoNotOptimize(mean_shift_grouping(mesh, cfg));
  }
  state.counters["vertices"] = static_cast<double>(base.vertex_count());
}
BENCHMARK(BM_MeanShift)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
