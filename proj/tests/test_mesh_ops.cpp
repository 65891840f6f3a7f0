#include <doctest.h>

#include "planes3d/mesh_ops.hpp"

#include <random>
#include <set>

using namespace planes3d;

namespace {

// two disjoint triangles; vertices 0-2 and 3-5
TriMesh two_islands() {
  TriMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0),
                Vec3(5, 0, 0), Vec3(6, 0, 0), Vec3(5, 1, 0)};
  m.faces = {{{0, 1, 2}}, {{3, 4, 5}}};
  return m;
}

}  // namespace

TEST_CASE("vertex_adjacency lists each undirected edge once, sorted") {
  TriMesh m = two_islands();
  m.faces.push_back({{0, 1, 2}});  // duplicate face must not duplicate neighbors
  const auto adj = vertex_adjacency(m);
  REQUIRE(adj.size() == 6);
  CHECK(adj[0] == std::vector<int>{1, 2});
  CHECK(adj[1] == std::vector<int>{0, 2});
  CHECK(adj[4] == std::vector<int>{3, 5});
}

TEST_CASE("split_by_connectivity separates same-label islands, keeps -1") {
  TriMesh m = two_islands();
  m.vertex_labels = {0, 0, 0, 0, 0, kUnlabeled};
  const int k = split_by_connectivity(m);
  CHECK(k == 2);
  CHECK(m.vertex_labels == std::vector<int>{0, 0, 0, 1, 1, kUnlabeled});

  // idempotent up to renaming: already-split labels stay split
  TriMesh again = m;
  CHECK(split_by_connectivity(again) == 2);
  CHECK(again.vertex_labels == m.vertex_labels);
}

TEST_CASE("split_by_connectivity on edge-free vertices gives one label each") {
  TriMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0)};
  m.vertex_labels = {4, 4, 4};
  CHECK(split_by_connectivity(m) == 3);
  CHECK(m.vertex_labels == std::vector<int>{0, 1, 2});
}

TEST_CASE("split_by_connectivity leaves a contiguous label unchanged") {
  TriMesh m = two_islands();
  m.faces.push_back({{2, 3, 0}});  // bridge the islands
  m.vertex_labels = {7, 7, 7, 7, 7, 7};
  CHECK(split_by_connectivity(m) == 1);
  for (int lab : m.vertex_labels) CHECK(lab == 0);
}

TEST_CASE("propagate_labels: chain endpoints win their nearest vertices in round one") {
  // chain 0-1-2-3 built out of two thin triangles per link
  TriMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0), Vec3(3, 0, 0),
                Vec3(0.5, 1, 0), Vec3(2.5, 1, 0)};
  m.faces = {{{0, 1, 4}}, {{1, 2, 4}}, {{2, 3, 5}}};
  m.vertex_labels = {1, kUnlabeled, kUnlabeled, 2, kUnlabeled, kUnlabeled};
  propagate_labels(m);
  CHECK(m.vertex_labels[1] == 1);
  CHECK(m.vertex_labels[2] == 2);
  CHECK(m.vertex_labels[4] == 1);
  CHECK(m.vertex_labels[5] == 2);
}

TEST_CASE("propagate_labels votes by frequency, ties to the lowest label") {
  TriMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0), Vec3(1, 1, 0)};
  m.faces = {{{0, 1, 3}}, {{1, 2, 3}}};
  SUBCASE("majority") {
    m.vertex_labels = {5, 5, 3, kUnlabeled};  // v3 sees 5,5,3
    propagate_labels(m);
    CHECK(m.vertex_labels[3] == 5);
  }
  SUBCASE("tie goes to the lower id") {
    m.vertex_labels = {9, kUnlabeled, 2, kUnlabeled};  // v3 sees 9 and 2 once each
    propagate_labels(m);
    CHECK(m.vertex_labels[3] == 2);
  }
}

TEST_CASE("propagate_labels leaves label-free components and full meshes alone") {
  TriMesh m = two_islands();
  m.vertex_labels = {3, 3, 3, kUnlabeled, kUnlabeled, kUnlabeled};
  propagate_labels(m);
  CHECK(m.vertex_labels == std::vector<int>{3, 3, 3, kUnlabeled, kUnlabeled, kUnlabeled});

  m.vertex_labels = {1, 2, 1, 2, 1, 2};
  const auto before = m.vertex_labels;
  propagate_labels(m);
  CHECK(m.vertex_labels == before);
}

TEST_CASE("remove_small_instances: 99 vertices removed, 100 kept") {
  TriMesh m;
  for (int i = 0; i < 199; ++i) {
    m.vertices.emplace_back(i, 0, 0);
    m.vertex_labels.push_back(i < 99 ? 0 : 1);
  }
  remove_small_instances(m, 100);
  for (int i = 0; i < 99; ++i) CHECK(m.vertex_labels[i] == kUnlabeled);
  for (int i = 99; i < 199; ++i) CHECK(m.vertex_labels[i] == 1);
}

TEST_CASE("compact_labels renumbers by first appearance and returns the count") {
  TriMesh m;
  m.vertices.resize(5, Vec3::Zero());
  m.vertex_labels = {7, 3, 7, kUnlabeled, 2};
  CHECK(compact_labels(m) == 3);
  CHECK(m.vertex_labels == std::vector<int>{0, 1, 0, kUnlabeled, 2});
}

TEST_CASE("vertices_by_label groups compact labels and rejects out-of-range") {
  TriMesh m;
  m.vertices.resize(4, Vec3::Zero());
  m.vertex_labels = {1, 0, 1, kUnlabeled};
  const auto groups = vertices_by_label(m, 2);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0] == std::vector<int>{1});
  CHECK(groups[1] == std::vector<int>{0, 2});
  CHECK_THROWS(vertices_by_label(m, 1));
}

TEST_CASE("sample_mesh_surface: unit square centroid, area weighting, determinism") {
  TriMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)};
  m.faces = {{{0, 1, 2}}, {{0, 2, 3}}};
  const PointCloud c = sample_mesh_surface(m, 10000, false, 42);
  REQUIRE(c.points.size() == 10000);
  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : c.points) {
    centroid += p;
    CHECK(p.x() >= 0.0);
    CHECK(p.x() <= 1.0);
    CHECK(p.y() >= 0.0);
    CHECK(p.y() <= 1.0);
    CHECK(p.z() == 0.0);
  }
  centroid /= 10000.0;
  CHECK((centroid - Vec3(0.5, 0.5, 0)).norm() < 0.02);

  const PointCloud c2 = sample_mesh_surface(m, 10000, false, 42);
  REQUIRE(c2.points.size() == c.points.size());
  for (size_t i = 0; i < c.points.size(); ++i) CHECK(c.points[i] == c2.points[i]);

  const PointCloud c3 = sample_mesh_surface(m, 10000, false, 43);
  CHECK(c.points[0] != c3.points[0]);
}

TEST_CASE("sample_mesh_surface splits samples by face area") {
  TriMesh m;
  // area 0.5 triangle vs area 8 triangle
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0),  Vec3(0, 1, 0),
                Vec3(10, 0, 0), Vec3(14, 0, 0), Vec3(10, 4, 0)};
  m.faces = {{{0, 1, 2}}, {{3, 4, 5}}};
  m.vertex_labels = {0, 0, 0, 1, 1, 1};
  const PointCloud c = sample_mesh_surface(m, 20000, false, 1);
  int small = 0;
  for (int lab : c.labels) small += lab == 0 ? 1 : 0;
  const double frac = small / 20000.0;
  CHECK(frac == doctest::Approx(0.5 / 8.5).epsilon(0.15));
}

TEST_CASE("sample_mesh_surface label handling on ambiguous faces") {
  TriMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  m.faces = {{{0, 1, 2}}};
  m.vertex_labels = {0, 0, 1};
  const PointCloud keep = sample_mesh_surface(m, 50, false, 0);
  REQUIRE(keep.labels.size() == 50);
  for (int lab : keep.labels) CHECK(lab == kUnlabeled);
  const PointCloud drop = sample_mesh_surface(m, 50, true, 0);
  CHECK(drop.points.empty());
}

TEST_CASE("sample_mesh_surface contracts: n=0, zero area, unanimous labels") {
  TriMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  m.faces = {{{0, 1, 2}}};
  m.vertex_labels = {4, 4, 4};
  CHECK(sample_mesh_surface(m, 0, false, 0).points.empty());
  const PointCloud c = sample_mesh_surface(m, 10, false, 0);
  for (int lab : c.labels) CHECK(lab == 4);

  TriMesh degenerate;
  degenerate.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0)};
  degenerate.faces = {{{0, 1, 2}}};
  CHECK_THROWS(sample_mesh_surface(degenerate, 10, false, 0));
}
