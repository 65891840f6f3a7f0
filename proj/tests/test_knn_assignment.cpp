#include <doctest.h>

#include "planes3d/assignment.hpp"
#include "planes3d/knn.hpp"

#include <algorithm>
#include <numeric>
#include <random>

using namespace planes3d;

namespace {

std::pair<int, double> brute_nearest(const std::vector<Vec3>& pts, const Vec3& q) {
  int best = -1;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < pts.size(); ++i) {
    const double d2 = (pts[i] - q).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = static_cast<int>(i);
    }
  }
  return {best, best_d2};
}

double brute_min_cost(const Eigen::MatrixXd& cost) {
  // exhaustive over injections of the smaller side into the larger
  const bool rows_small = cost.rows() <= cost.cols();
  const int small = static_cast<int>(rows_small ? cost.rows() : cost.cols());
  const int large = static_cast<int>(rows_small ? cost.cols() : cost.rows());
  std::vector<int> perm(large);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0;
    for (int i = 0; i < small; ++i) total += rows_small ? cost(i, perm[i]) : cost(perm[i], i);
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

TEST_CASE("KdTree matches brute force on random clouds, including boundary sizes") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> coord(-3.0, 3.0);
  for (int n : {1, 2, 7, 8, 9, 100, 500}) {
    std::vector<Vec3> pts(n);
    for (auto& p : pts) p = Vec3(coord(rng), coord(rng), coord(rng));
    const KdTree tree(pts);
    CHECK(tree.size() == static_cast<size_t>(n));
    for (int t = 0; t < 200; ++t) {
      const Vec3 q(coord(rng), coord(rng), coord(rng));
      const auto [bi, bd2] = brute_nearest(pts, q);
      const auto [ti, td2] = tree.nearest(q);
      CHECK(ti == bi);
      CHECK(td2 == doctest::Approx(bd2).epsilon(1e-12));
    }
  }
}

TEST_CASE("KdTree tie-breaks duplicates to the lowest index like the brute scan") {
  std::vector<Vec3> pts = {Vec3(1, 1, 1), Vec3(0, 0, 0), Vec3(1, 1, 1), Vec3(0, 0, 0)};
  const KdTree tree(pts);
  CHECK(tree.nearest(Vec3(1, 1, 1)).first == 0);
  CHECK(tree.nearest(Vec3(0.1, 0, 0)).first == 1);
  // query equidistant to indices 1 and 3
  CHECK(tree.nearest(Vec3(0, 0, 0)).first == 1);
}

TEST_CASE("KdTree on an empty set returns the sentinel") {
  const KdTree tree;
  const auto [idx, d2] = tree.nearest(Vec3(1, 2, 3));
  CHECK(idx == -1);
  CHECK(std::isinf(d2));
}

TEST_CASE("solve_assignment: [[1,2],[2,1]] picks the diagonal, cost 2") {
  Eigen::MatrixXd cost(2, 2);
  cost << 1, 2, 2, 1;
  const AssignmentResult r = solve_assignment(cost);
  CHECK(r.cost == doctest::Approx(2.0));
  CHECK(r.row_to_col == std::vector<int>{0, 1});
}

TEST_CASE("solve_assignment equals exhaustive minimum on random matrices up to 8x8") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> c(0.0, 10.0);
  std::uniform_int_distribution<int> dim(1, 8);
  for (int t = 0; t < 120; ++t) {
    const int rows = dim(rng), cols = dim(rng);
    Eigen::MatrixXd cost(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) cost(i, j) = c(rng);
    const AssignmentResult r = solve_assignment(cost);
    CHECK(r.cost == doctest::Approx(brute_min_cost(cost)).epsilon(1e-9));

    // row_to_col is a valid partial injection covering the smaller side
    std::vector<int> used;
    int assigned = 0;
    double total = 0;
    REQUIRE(static_cast<int>(r.row_to_col.size()) == rows);
    for (int i = 0; i < rows; ++i) {
      const int j = r.row_to_col[i];
      if (j < 0) continue;
      CHECK(j < cols);
      used.push_back(j);
      total += cost(i, j);
      ++assigned;
    }
    std::sort(used.begin(), used.end());
    CHECK(std::adjacent_find(used.begin(), used.end()) == used.end());
    CHECK(assigned == std::min(rows, cols));
    CHECK(total == doctest::Approx(r.cost).epsilon(1e-9));
  }
}

TEST_CASE("PlaneTracker keeps ids for identical key sets") {
  PlaneTracker tracker;
  const std::vector<std::vector<int64_t>> planes = {{1, 2, 3}, {10, 11}, {20, 21, 22}};
  const auto first = tracker.update(planes);
  CHECK(first == std::vector<int>{0, 1, 2});
  const auto second = tracker.update(planes);
  CHECK(second == first);
}

TEST_CASE("PlaneTracker survives reordering and partial overlap") {
  PlaneTracker tracker;
  (void)tracker.update({{1, 2, 3, 4}, {10, 11, 12}});
  // swapped order, one plane grew
  const auto ids = tracker.update({{10, 11, 12, 13}, {1, 2, 3, 4}});
  CHECK(ids == std::vector<int>{1, 0});
}

TEST_CASE("PlaneTracker hands fresh ids to non-overlapping instances") {
  PlaneTracker tracker;
  (void)tracker.update({{1, 2, 3}});
  // zero IoU: matching would pair them, but no overlap means a new plane
  const auto ids = tracker.update({{50, 51, 52}});
  CHECK(ids == std::vector<int>{1});
  // and the old id is not recycled later
  const auto again = tracker.update({{60, 61}});
  CHECK(again == std::vector<int>{2});
}

TEST_CASE("PlaneTracker: new plane entering view keeps existing ids") {
  PlaneTracker tracker;
  (void)tracker.update({{1, 2, 3}, {10, 11, 12}});
  const auto ids = tracker.update({{1, 2, 3, 4}, {10, 11}, {100, 101, 102}});
  CHECK(ids == std::vector<int>{0, 1, 2});
}

TEST_CASE("PlaneTracker from empty start labels everything fresh") {
  PlaneTracker tracker;
  const auto ids = tracker.update({{5}, {6}, {7}});
  CHECK(ids == std::vector<int>{0, 1, 2});
  CHECK(tracker.next_id() == 3);
}
