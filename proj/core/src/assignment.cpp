#include "planes3d/assignment.hpp"

#include <algorithm>
#include <limits>

namespace planes3d {

namespace {

/// Potentials-based Hungarian algorithm, O(n^2 m) with n <= m.
/// Returns col index per row.
std::vector<int> solve_square(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  const int m = static_cast<int>(a.cols());
  const double inf = std::numeric_limits<double>::infinity();

  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = -1;
      double delta = inf;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }

  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= m; ++j)
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace

AssignmentResult solve_assignment(const Eigen::MatrixXd& cost) {
  AssignmentResult out;
  out.row_to_col.assign(cost.rows(), -1);
  if (cost.rows() == 0 || cost.cols() == 0) return out;

  if (cost.rows() <= cost.cols()) {
    out.row_to_col = solve_square(cost);
  } else {
    const std::vector<int> col_to_row = solve_square(cost.transpose());
    for (int c = 0; c < static_cast<int>(col_to_row.size()); ++c)
      out.row_to_col[col_to_row[c]] = c;
  }
  for (int r = 0; r < static_cast<int>(out.row_to_col.size()); ++r)
    if (out.row_to_col[r] >= 0) out.cost += cost(r, out.row_to_col[r]);
  return out;
}

namespace {

double key_iou(const std::vector<int64_t>& a, const std::vector<int64_t>& b) {
  if (a.empty() && b.empty()) return 0.0;
  size_t inter = 0, i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) ++i;
    else if (b[j] < a[i]) ++j;
    else { ++inter; ++i; ++j; }
  }
  const size_t uni = a.size() + b.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace

std::vector<int> PlaneTracker::update(const std::vector<std::vector<int64_t>>& instance_keys) {
  std::vector<std::vector<int64_t>> sorted_keys = instance_keys;
  for (auto& keys : sorted_keys) std::sort(keys.begin(), keys.end());

  const int t = static_cast<int>(tracks_.size());
  const int c = static_cast<int>(sorted_keys.size());
  std::vector<int> ids(c, -1);

  if (t > 0 && c > 0) {
    Eigen::MatrixXd iou(t, c);
    for (int i = 0; i < t; ++i)
      for (int j = 0; j < c; ++j) iou(i, j) = key_iou(tracks_[i].keys, sorted_keys[j]);
    const AssignmentResult match = solve_assignment(Eigen::MatrixXd(1.0 - iou.array()));
    for (int i = 0; i < t; ++i) {
      const int j = match.row_to_col[i];
      if (j >= 0 && iou(i, j) > 0.0) ids[j] = tracks_[i].id;
    }
  }
  for (int j = 0; j < c; ++j)
    if (ids[j] < 0) ids[j] = next_id_++;

  tracks_.clear();
  tracks_.reserve(c);
  for (int j = 0; j < c; ++j) tracks_.push_back({ids[j], std::move(sorted_keys[j])});
  return ids;
}

}  // namespace planes3d
