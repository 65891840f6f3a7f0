#include <doctest.h>

#include "planes3d/grouping.hpp"
#include "planes3d/synth.hpp"

#include <map>
#include <random>
#include <set>

using namespace planes3d;

namespace {

// connected (n+1)^2-vertex grid over [-half, half]^2 at height z, normals +z
TriMesh plane_grid(int n, double half, double z) {
  TriMesh m;
  const double step = 2 * half / n;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) {
      m.vertices.emplace_back(-half + i * step, -half + j * step, z);
      m.vertex_normals.emplace_back(0, 0, 1);
    }
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      m.faces.push_back({{id(i, j), id(i + 1, j), id(i + 1, j + 1)}});
      m.faces.push_back({{id(i, j), id(i + 1, j + 1), id(i, j + 1)}});
    }
  return m;
}

void set_constant_embedding(TriMesh& m, const Vec3f& e) {
  m.vertex_embeddings.assign(m.vertex_count(), e);
}

TriMesh append(TriMesh a, const TriMesh& b) {
  const int off = static_cast<int>(a.vertex_count());
  a.vertices.insert(a.vertices.end(), b.vertices.begin(), b.vertices.end());
  a.vertex_normals.insert(a.vertex_normals.end(), b.vertex_normals.begin(),
                          b.vertex_normals.end());
  a.vertex_embeddings.insert(a.vertex_embeddings.end(), b.vertex_embeddings.begin(),
                             b.vertex_embeddings.end());
  for (auto f : b.faces) a.faces.push_back({{f[0] + off, f[1] + off, f[2] + off}});
  return a;
}

// purity of predicted labels against reference labels: every predicted
// instance must be >= 99% one reference label, and the mapping is a bijection
bool labels_match(const std::vector<int>& pred, const std::vector<int>& ref, int expect) {
  std::map<int, std::map<int, int>> overlap;
  for (size_t i = 0; i < pred.size(); ++i)
    if (pred[i] != kUnlabeled && ref[i] != kUnlabeled) ++overlap[pred[i]][ref[i]];
  if (static_cast<int>(overlap.size()) != expect) return false;
  std::set<int> taken;
  for (const auto& [p, votes] : overlap) {
    int total = 0, best = 0, best_ref = -1;
    for (const auto& [r, c] : votes) {
      total += c;
      if (c > best) {
        best = c;
        best_ref = r;
      }
    }
    if (best < total * 0.99) return false;
    if (!taken.insert(best_ref).second) return false;
  }
  return true;
}

TriMesh box_mesh_with_anchor_embeddings(uint64_t seed, double noise, double cell = 0.1) {
  const SyntheticScene scene = make_preset("box6", seed);
  TriMesh mesh = ground_truth_mesh(scene, cell);
  std::mt19937_64 rng(mix_seed(seed, 400));
  std::normal_distribution<float> n(0.0f, static_cast<float>(noise));
  mesh.vertex_embeddings.resize(mesh.vertex_count());
  for (size_t i = 0; i < mesh.vertex_count(); ++i) {
    const Vec3f a = scene.anchors[mesh.vertex_labels[i]];
    mesh.vertex_embeddings[i] = a + Vec3f(n(rng), n(rng), n(rng));
  }
  return mesh;
}

}  // namespace

TEST_CASE("fit_plane nails axis-aligned and oblique noiseless planes") {
  const std::vector<Vec3> square = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)};
  const Plane p = fit_plane(square);
  CHECK(std::abs(std::abs(p.normal.z()) - 1.0) < 1e-12);
  CHECK(std::abs(p.offset) < 1e-12);

  const Vec3 n = Vec3(1, 1, 1).normalized();
  const double d = 2.0;
  // orthonormal frame in the plane
  const Vec3 u = n.cross(Vec3::UnitX()).normalized(), v = n.cross(u);
  std::vector<Vec3> pts;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  for (int i = 0; i < 60; ++i) pts.push_back(d * n + coord(rng) * u + coord(rng) * v);
  const Plane q = fit_plane(pts, n);
  CHECK((q.normal - n).norm() < 1e-9);
  CHECK(q.offset == doctest::Approx(d).epsilon(1e-9));
  for (const Vec3& p_i : pts) CHECK(q.distance(p_i) < 1e-9);
}

TEST_CASE("fit_plane rejects degenerate input") {
  CHECK_THROWS(fit_plane(std::vector<Vec3>{Vec3(0, 0, 0), Vec3(1, 0, 0)}));
  CHECK_THROWS(fit_plane(std::vector<Vec3>{}));
  // collinear
  CHECK_THROWS(fit_plane(std::vector<Vec3>{Vec3(0, 0, 0), Vec3(1, 1, 1), Vec3(2, 2, 2),
                                           Vec3(3, 3, 3)}));
  // all identical
  CHECK_THROWS(fit_plane(std::vector<Vec3>(5, Vec3(1, 2, 3))));
}

TEST_CASE("fit_plane commutes with rigid transforms") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  std::vector<Vec3> pts;
  for (int i = 0; i < 40; ++i)
    pts.emplace_back(coord(rng), coord(rng), 0.3 * coord(rng) + 0.1);  // thick-ish slab
  const Plane base = fit_plane(pts);

  const Eigen::AngleAxisd rot(0.83, Vec3(1, 2, -1).normalized());
  const Mat3 r = rot.toRotationMatrix();
  const Vec3 t(0.4, -2.0, 1.1);
  std::vector<Vec3> moved;
  for (const Vec3& p : pts) moved.push_back(r * p + t);
  const Plane fit_moved = fit_plane(moved);

  // same fit expressed in the moved frame, up to sign
  const Vec3 n_expect = r * base.normal;
  const double sign = n_expect.dot(fit_moved.normal) >= 0 ? 1.0 : -1.0;
  CHECK((fit_moved.normal - sign * n_expect).norm() < 1e-9);
  for (const Vec3& p : moved) CHECK(fit_moved.distance(p) == doctest::Approx(base.distance(r.transpose() * (p - t))).epsilon(1e-9));
}

TEST_CASE("is_inlier applies the distance gate and the optional embedding gate") {
  RansacConfig cfg;  // r_d 0.1, r_e 0.5
  const Plane plane{Vec3(0, 0, 1), 1.0};
  const Vec3f seed_emb(1, 0, 0);

  CHECK(is_inlier(Vec3(0.3, 0.2, 1.0), seed_emb, plane, seed_emb, cfg));
  CHECK_FALSE(is_inlier(Vec3(0, 0, 1.2), seed_emb, plane, seed_emb, cfg));  // 0.2 > r_d

  const Vec3f far_emb(1.6f, 0, 0);  // embedding distance 0.6 > r_e
  CHECK_FALSE(is_inlier(Vec3(0, 0, 1.05), far_emb, plane, seed_emb, cfg));
  cfg.use_embeddings = false;
  CHECK(is_inlier(Vec3(0, 0, 1.05), far_emb, plane, seed_emb, cfg));
}

TEST_CASE("merge_planes folds similar instances transitively onto the lowest label") {
  // three coplanar grids, embeddings A=0.0, B=0.15, C=0.30: A~B and B~C but not A~C
  TriMesh a = plane_grid(4, 0.5, 0.0);
  set_constant_embedding(a, Vec3f(0.0f, 0, 0));
  TriMesh b = plane_grid(4, 0.5, 0.0);
  set_constant_embedding(b, Vec3f(0.15f, 0, 0));
  TriMesh c = plane_grid(4, 0.5, 0.0);
  set_constant_embedding(c, Vec3f(0.30f, 0, 0));
  TriMesh mesh = append(append(a, b), c);
  mesh.vertex_labels.assign(mesh.vertex_count(), 0);
  for (size_t i = 25; i < 50; ++i) mesh.vertex_labels[i] = 1;
  for (size_t i = 50; i < 75; ++i) mesh.vertex_labels[i] = 2;

  auto instances = build_instances(mesh, 3);
  REQUIRE(instances.size() == 3);
  instances = merge_planes(mesh, std::move(instances), 0.2, 0.6);
  REQUIRE(instances.size() == 1);
  CHECK(instances[0].label == 0);
  for (int lab : mesh.vertex_labels) CHECK(lab == 0);
  CHECK(instances[0].vertices.size() == mesh.vertex_count());
}

TEST_CASE("merge_planes keeps instances apart when a gate fails") {
  SUBCASE("normals disagree") {
    // two grids, same embedding, normal dot = 0.5 < 0.6 after tilting one
    TriMesh a = plane_grid(4, 0.5, 0.0);
    TriMesh b = plane_grid(4, 0.5, 0.0);
    const Eigen::AngleAxisd tilt(std::acos(0.5), Vec3::UnitX());
    for (auto& v : b.vertices) v = tilt * v + Vec3(0, 3, 0);
    for (auto& n : b.vertex_normals) n = tilt * n;
    set_constant_embedding(a, Vec3f::Zero());
    set_constant_embedding(b, Vec3f::Zero());
    TriMesh mesh = append(a, b);
    mesh.vertex_labels.assign(mesh.vertex_count(), 0);
    for (size_t i = 25; i < 50; ++i) mesh.vertex_labels[i] = 1;
    auto instances = merge_planes(mesh, build_instances(mesh, 2), 0.2, 0.6);
    CHECK(instances.size() == 2);
  }
  SUBCASE("embeddings disagree") {
    TriMesh a = plane_grid(4, 0.5, 0.0);
    TriMesh b = plane_grid(4, 0.5, 0.0);
    set_constant_embedding(a, Vec3f::Zero());
    set_constant_embedding(b, Vec3f(0.5f, 0, 0));
    TriMesh mesh = append(a, b);
    mesh.vertex_labels.assign(mesh.vertex_count(), 0);
    for (size_t i = 25; i < 50; ++i) mesh.vertex_labels[i] = 1;
    auto instances = merge_planes(mesh, build_instances(mesh, 2), 0.2, 0.6);
    CHECK(instances.size() == 2);
  }
  SUBCASE("empty input") {
    TriMesh mesh;
    mesh.vertex_labels = {};
    CHECK(merge_planes(mesh, {}, 0.2, 0.6).empty());
  }
}

TEST_CASE("sequential_ransac: a noiseless plane becomes one instance holding everything") {
  TriMesh mesh = plane_grid(12, 1.0, 0.5);  // 169 vertices
  set_constant_embedding(mesh, Vec3f(0.7f, -0.2f, 0.1f));
  RansacConfig cfg;
  cfg.seed = 4;
  const auto instances = sequential_ransac(mesh, cfg);
  REQUIRE(instances.size() == 1);
  CHECK(instances[0].vertices.size() == mesh.vertex_count());
  for (int lab : mesh.vertex_labels) CHECK(lab == 0);
  CHECK(std::abs(instances[0].plane.normal.z()) > 1 - 1e-9);
  CHECK(instances[0].plane.offset * instances[0].plane.normal.z() == doctest::Approx(0.5));
}

TEST_CASE("sequential_ransac on an empty mesh returns nothing") {
  TriMesh mesh;
  RansacConfig cfg;
  CHECK(sequential_ransac(mesh, cfg).empty());
  MeanShiftConfig ms;
  CHECK(mean_shift_grouping(mesh, ms).empty());
}

TEST_CASE("sequential_ransac recovers the six box walls from anchored embeddings") {
  TriMesh mesh = box_mesh_with_anchor_embeddings(21, 0.05);
  const std::vector<int> gt = mesh.vertex_labels;
  mesh.vertex_labels.clear();

  RansacConfig cfg;
  cfg.seed = 9;
  const auto instances = sequential_ransac(mesh, cfg);
  REQUIRE(instances.size() == 6);
  CHECK(labels_match(mesh.vertex_labels, gt, 6));

  // labels partition: instance vertex lists are disjoint and consistent
  std::vector<int> seen(mesh.vertex_count(), 0);
  for (const auto& inst : instances) {
    CHECK(inst.vertices.size() >= 100u);
    CHECK(std::abs(inst.mean_normal.norm() - 1.0) < 1e-9);
    for (int v : inst.vertices) {
      CHECK(mesh.vertex_labels[v] == inst.label);
      seen[v] += 1;
    }
  }
  for (size_t v = 0; v < mesh.vertex_count(); ++v)
    CHECK(seen[v] == (mesh.vertex_labels[v] == kUnlabeled ? 0 : 1));
}

TEST_CASE("sequential_ransac is deterministic for a fixed seed") {
  TriMesh m1 = box_mesh_with_anchor_embeddings(5, 0.05);
  m1.vertex_labels.clear();
  TriMesh m2 = m1;
  RansacConfig cfg;
  cfg.seed = 31;
  const auto i1 = sequential_ransac(m1, cfg);
  const auto i2 = sequential_ransac(m2, cfg);
  CHECK(m1.vertex_labels == m2.vertex_labels);
  REQUIRE(i1.size() == i2.size());
  for (size_t k = 0; k < i1.size(); ++k) {
    CHECK(i1[k].label == i2[k].label);
    CHECK(i1[k].vertices == i2[k].vertices);
    CHECK(i1[k].plane.normal == i2[k].plane.normal);
  }
}

TEST_CASE("coplanar picture on a wall separates only when embeddings gate") {
  // one connected grid at z=0; the central patch carries the picture anchor
  TriMesh mesh = plane_grid(40, 1.0, 0.0);  // 41x41 = 1681 vertices
  const Vec3f wall_anchor(1.2f, 0, 0), picture_anchor(-0.3f, 0.9f, 0.4f);
  mesh.vertex_embeddings.resize(mesh.vertex_count());
  std::mt19937_64 rng(2);
  std::normal_distribution<float> n(0.0f, 0.02f);
  int picture_count = 0;
  for (size_t i = 0; i < mesh.vertex_count(); ++i) {
    const Vec3& p = mesh.vertices[i];
    const bool picture = std::abs(p.x()) <= 0.3 && std::abs(p.y()) <= 0.3;
    picture_count += picture ? 1 : 0;
    mesh.vertex_embeddings[i] =
        (picture ? picture_anchor : wall_anchor) + Vec3f(n(rng), n(rng), n(rng));
  }
  REQUIRE(picture_count >= 100);

  TriMesh with = mesh, without = mesh;
  RansacConfig cfg;
  cfg.seed = 12;
  CHECK(sequential_ransac(with, cfg).size() == 2);
  cfg.use_embeddings = false;
  CHECK(sequential_ransac(without, cfg).size() == 1);
}

TEST_CASE("geometry-only grouping ignores any rotation of the embeddings") {
  TriMesh base = box_mesh_with_anchor_embeddings(8, 0.05);
  base.vertex_labels.clear();
  TriMesh rotated = base;
  const Eigen::AngleAxisf rot(1.1f, Vec3f(0.3f, -1.0f, 0.5f).normalized());
  for (auto& e : rotated.vertex_embeddings) e = rot * e;

  RansacConfig cfg;
  cfg.seed = 77;
  cfg.use_embeddings = false;
  const auto i1 = sequential_ransac(base, cfg);
  const auto i2 = sequential_ransac(rotated, cfg);
  CHECK(base.vertex_labels == rotated.vertex_labels);
  CHECK(i1.size() == i2.size());
}

TEST_CASE("mean shift: one shared embedding collapses to a single instance") {
  TriMesh mesh = plane_grid(12, 1.0, 0.0);
  set_constant_embedding(mesh, Vec3f(0.4f, 0.4f, -0.2f));
  MeanShiftConfig cfg;
  const auto instances = mean_shift_grouping(mesh, cfg);
  REQUIRE(instances.size() == 1);
  CHECK(instances[0].vertices.size() == mesh.vertex_count());
}

TEST_CASE("mean shift: two point masses a full unit apart stay two modes") {
  TriMesh a = plane_grid(12, 1.0, 0.0);   // 169 vertices each
  set_constant_embedding(a, Vec3f::Zero());
  TriMesh b = plane_grid(12, 1.0, 2.0);
  set_constant_embedding(b, Vec3f(1.0f, 0, 0));
  TriMesh mesh = append(a, b);
  MeanShiftConfig cfg;
  const auto instances = mean_shift_grouping(mesh, cfg);
  REQUIRE(instances.size() == 2);
  // embeddings decide membership: each instance is pure
  for (const auto& inst : instances) {
    const Vec3f m = inst.mean_embedding;
    for (int v : inst.vertices)
      CHECK((mesh.vertex_embeddings[v] - m).norm() < 0.5f);
  }
}

TEST_CASE("mean shift finds the six anchor modes on the box mesh") {
  TriMesh mesh = box_mesh_with_anchor_embeddings(13, 0.05);
  const std::vector<int> gt = mesh.vertex_labels;
  mesh.vertex_labels.clear();
  MeanShiftConfig cfg;
  const auto instances = mean_shift_grouping(mesh, cfg);
  REQUIRE(instances.size() == 6);
  CHECK(labels_match(mesh.vertex_labels, gt, 6));
}

TEST_CASE("build_instances summarizes labels with fits and means") {
  TriMesh a = plane_grid(6, 0.8, 0.0);
  set_constant_embedding(a, Vec3f(1, 0, 0));
  TriMesh b = plane_grid(6, 0.8, 3.0);
  set_constant_embedding(b, Vec3f(0, 1, 0));
  TriMesh mesh = append(a, b);
  mesh.vertex_labels.assign(mesh.vertex_count(), 0);
  for (size_t i = 49; i < 98; ++i) mesh.vertex_labels[i] = 1;

  const auto inst = build_instances(mesh, 2);
  REQUIRE(inst.size() == 2);
  CHECK(inst[0].label == 0);
  CHECK(inst[1].label == 1);
  CHECK(std::abs(inst[1].plane.normal.dot(Vec3(0, 0, 1))) > 1 - 1e-9);
  CHECK((inst[0].mean_embedding - Vec3f(1, 0, 0)).norm() < 1e-6f);
  CHECK((inst[1].mean_embedding - Vec3f(0, 1, 0)).norm() < 1e-6f);
  CHECK(inst[0].vertices.size() == 49u);
  CHECK(inst[1].vertices.size() == 49u);
}
