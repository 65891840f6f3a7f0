#pragma once

#include "planes3d/geometry.hpp"

namespace planes3d {

struct AssignmentResult {
  std::vector<int> row_to_col;  // -1 when a row stays unassigned (rows > cols)
  double cost = 0.0;
};

/// Minimum-cost assignment on a dense rectangular cost matrix; every index on
/// the smaller side is matched to a distinct index on the larger side.
AssignmentResult solve_assignment(const Eigen::MatrixXd& cost);

/// Keeps plane instance ids stable across re-extractions. Instances are
/// identified by the set of grid-edge keys of their vertices; consecutive
/// extractions of a growing TSDF volume share keys for unchanged surface, so
/// set IoU measures overlap. Matching minimizes 1 - IoU; pairs that do not
/// overlap at all get fresh ids instead.
class PlaneTracker {
 public:
  /// instance_keys: per current instance, the edge keys of its vertices (any
  /// order). Returns one persistent id per instance.
  std::vector<int> update(const std::vector<std::vector<int64_t>>& instance_keys);

  int next_id() const { return next_id_; }

 private:
  struct Track {
    int id = 0;
    std::vector<int64_t> keys;  // sorted
  };
  std::vector<Track> tracks_;
  int next_id_ = 0;
};

}  // namespace planes3d
