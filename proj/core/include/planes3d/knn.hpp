#pragma once

#include "planes3d/geometry.hpp"

namespace planes3d {

/// Exact nearest-neighbor search over a fixed set of 3D points. Ties in
/// distance resolve to the lowest point index, matching a brute-force scan.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::vector<Vec3> points);

  size_t size() const { return points_.size(); }

  /// Index and squared distance of the nearest point; {-1, inf} when empty.
  std::pair<int, double> nearest(const Vec3& query) const;

 private:
  struct Node {
    int axis = -1;         // -1 marks a leaf
    double split = 0.0;
    int left = -1, right = -1;
    int begin = 0, end = 0;  // leaf range into order_
  };

  int build(int begin, int end);
  void search(int node, const Vec3& query, int& best, double& best_d2) const;

  std::vector<Vec3> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
  static constexpr int kLeafSize = 8;
};

}  // namespace planes3d
