#include "planes3d/metrics.hpp"

#include "planes3d/knn.hpp"
#include "planes3d/mesh_ops.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace planes3d {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Mean nearest distance from every `from` point to the `to` set, plus the
/// fraction landing within `threshold`.
std::pair<double, double> directed_distance(const std::vector<Vec3>& from, const KdTree& to,
                                            double threshold) {
  if (from.empty() || to.size() == 0) return {kInf, 0.0};
  double sum = 0.0;
  size_t hits = 0;
  for (const Vec3& p : from) {
    const double d = std::sqrt(to.nearest(p).second);
    sum += d;
    if (d <= threshold) ++hits;
  }
  return {sum / from.size(), static_cast<double>(hits) / from.size()};
}

}  // namespace

ChamferResult chamfer_f1(const PointCloud& pred, const PointCloud& gt, double f1_threshold) {
  ChamferResult out;
  const KdTree pred_tree(pred.points), gt_tree(gt.points);
  auto [acc, precision] = directed_distance(pred.points, gt_tree, f1_threshold);
  auto [comp, recall] = directed_distance(gt.points, pred_tree, f1_threshold);
  out.accuracy = acc;
  out.completion = comp;
  out.chamfer = 0.5 * (acc + comp);
  out.precision = precision;
  out.recall = recall;
  out.f1 = precision + recall > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
  return out;
}

std::vector<uint8_t> visibility_mask(const std::vector<Vec3>& points,
                                     const std::vector<const Keyframe*>& frames, double margin) {
  std::vector<uint8_t> keep(points.size(), 0);
  for (size_t i = 0; i < points.size(); ++i) {
    for (const Keyframe* kf : frames) {
      const Vec3 p_cam = kf->pose.to_camera(points[i]);
      if (p_cam.z() <= 0) continue;
      const Eigen::Vector2d px = project_pixel(kf->pose.intrinsics, p_cam);
      const int u = static_cast<int>(std::lround(px.x()));
      const int v = static_cast<int>(std::lround(px.y()));
      if (!kf->depth.inside(v, u)) continue;
      const float d = kf->depth(v, u);
      if (!depth_valid(d)) continue;
      if (p_cam.z() <= d + margin) {
        keep[i] = 1;
        break;
      }
    }
  }
  return keep;
}

PointCloud filter_visible(const PointCloud& cloud, const std::vector<const Keyframe*>& frames,
                          double margin) {
  const std::vector<uint8_t> keep = visibility_mask(cloud.points, frames, margin);
  PointCloud out;
  for (size_t i = 0; i < cloud.points.size(); ++i) {
    if (!keep[i]) continue;
    out.points.push_back(cloud.points[i]);
    if (cloud.has_labels()) out.labels.push_back(cloud.labels[i]);
  }
  return out;
}

std::vector<int> transfer_labels(const TriMesh& pred, const TriMesh& gt) {
  std::vector<int> out(gt.vertex_count(), kUnlabeled);
  if (pred.vertices.empty()) return out;
  if (!pred.has_labels()) throw std::runtime_error("transfer_labels: prediction has no labels");
  const KdTree tree(pred.vertices);
  for (size_t i = 0; i < gt.vertex_count(); ++i)
    out[i] = pred.vertex_labels[tree.nearest(gt.vertices[i]).first];
  return out;
}

SegmentationResult segmentation_metrics(const std::vector<int>& pred_labels,
                                        const std::vector<int>& gt_labels) {
  if (pred_labels.size() != gt_labels.size())
    throw std::runtime_error("segmentation_metrics: label arrays differ in length");
  if (pred_labels.empty()) throw std::runtime_error("segmentation_metrics: no labels");
  for (size_t i = 0; i < pred_labels.size(); ++i)
    if (pred_labels[i] < 0 || gt_labels[i] < 0)
      throw std::runtime_error("segmentation_metrics: labels must be non-negative");

  const double n = static_cast<double>(pred_labels.size());
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> pred_sizes, gt_sizes;
  for (size_t i = 0; i < pred_labels.size(); ++i) {
    joint[{pred_labels[i], gt_labels[i]}] += 1.0;
    pred_sizes[pred_labels[i]] += 1.0;
    gt_sizes[gt_labels[i]] += 1.0;
  }

  auto entropy = [n](const std::map<int, double>& sizes) {
    double h = 0.0;
    for (const auto& [lab, count] : sizes) h -= count / n * std::log(count / n);
    return h;
  };
  double mutual = 0.0;
  for (const auto& [pg, count] : joint) {
    const double pij = count / n;
    mutual += pij * std::log(pij * n * n / (pred_sizes.at(pg.first) * gt_sizes.at(pg.second)));
  }

  SegmentationResult out;
  out.voi = std::max(0.0, entropy(pred_sizes) + entropy(gt_sizes) - 2.0 * mutual);

  auto pairs2 = [](double c) { return c * (c - 1.0) / 2.0; };
  const double total_pairs = pairs2(n);
  if (total_pairs == 0) {
    out.ri = 1.0;
  } else {
    double same_pred = 0.0, same_gt = 0.0, same_both = 0.0;
    for (const auto& [lab, count] : pred_sizes) same_pred += pairs2(count);
    for (const auto& [lab, count] : gt_sizes) same_gt += pairs2(count);
    for (const auto& [pg, count] : joint) same_both += pairs2(count);
    out.ri = (total_pairs - same_pred - same_gt + 2.0 * same_both) / total_pairs;
  }

  double covering = 0.0;
  for (const auto& [gt_label, gt_size] : gt_sizes) {
    double best = 0.0;
    for (const auto& [pg, count] : joint) {
      if (pg.second != gt_label) continue;
      const double iou = count / (pred_sizes.at(pg.first) + gt_size - count);
      best = std::max(best, iou);
    }
    covering += gt_size * best;
  }
  out.sc = covering / n;
  return out;
}

PlanarResult planar_metrics(const std::vector<std::vector<Vec3>>& pred_planes,
                            const std::vector<std::vector<Vec3>>& gt_planes, int k_planes) {
  PlanarResult out;
  if (gt_planes.empty()) throw std::runtime_error("planar_metrics: no ground-truth planes");
  if (pred_planes.empty()) {
    out.fidelity = out.accuracy = out.chamfer = kInf;
    return out;
  }

  std::vector<int> order(gt_planes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return gt_planes[a].size() > gt_planes[b].size();
  });
  const int k = std::min<int>(k_planes, static_cast<int>(order.size()));

  std::vector<KdTree> pred_trees;
  pred_trees.reserve(pred_planes.size());
  for (const auto& pts : pred_planes) pred_trees.emplace_back(pts);

  double fid_sum = 0.0, acc_sum = 0.0;
  for (int rank = 0; rank < k; ++rank) {
    const auto& gt_pts = gt_planes[order[rank]];
    double best_completion = kInf;
    int best_pred = -1;
    for (size_t p = 0; p < pred_planes.size(); ++p) {
      const double comp = directed_distance(gt_pts, pred_trees[p], kInf).first;
      if (comp < best_completion) {
        best_completion = comp;
        best_pred = static_cast<int>(p);
      }
    }
    fid_sum += best_completion;
    const KdTree gt_tree(gt_pts);
    acc_sum += directed_distance(pred_planes[best_pred], gt_tree, kInf).first;
  }
  out.fidelity = fid_sum / k;
  out.accuracy = acc_sum / k;
  out.chamfer = 0.5 * (out.fidelity + out.accuracy);
  return out;
}

EvaluationReport evaluate_meshes(const TriMesh& pred, const TriMesh& gt,
                                 const std::vector<const Keyframe*>& frames,
                                 const MetricConfig& cfg) {
  if (!pred.has_labels() || !gt.has_labels())
    throw std::runtime_error("evaluate_meshes: both meshes need plane labels");

  // Same seed on both sides so identical meshes sample identical clouds and
  // score an exact zero.
  PointCloud pred_cloud = sample_mesh_surface(pred, cfg.n_sample_points, true, cfg.sample_seed);
  PointCloud gt_cloud = sample_mesh_surface(gt, cfg.n_sample_points, true, cfg.sample_seed);
  if (!frames.empty()) {
    pred_cloud = filter_visible(pred_cloud, frames, cfg.visibility_margin);
    gt_cloud = filter_visible(gt_cloud, frames, cfg.visibility_margin);
  }
  const ChamferResult geo = chamfer_f1(pred_cloud, gt_cloud, cfg.f1_threshold);

  std::vector<uint8_t> gt_visible(gt.vertex_count(), 1);
  if (!frames.empty()) gt_visible = visibility_mask(gt.vertices, frames, cfg.visibility_margin);
  const std::vector<int> transferred = transfer_labels(pred, gt);
  std::vector<int> seg_pred, seg_gt;
  for (size_t i = 0; i < gt.vertex_count(); ++i) {
    if (!gt_visible[i]) continue;
    if (transferred[i] == kUnlabeled || gt.vertex_labels[i] == kUnlabeled) continue;
    seg_pred.push_back(transferred[i]);
    seg_gt.push_back(gt.vertex_labels[i]);
  }
  if (seg_pred.empty())
    throw std::runtime_error("evaluate_meshes: no labeled overlap between prediction and gt");
  const SegmentationResult seg = segmentation_metrics(seg_pred, seg_gt);

  auto instance_points = [](const TriMesh& mesh) {
    std::map<int, std::vector<Vec3>> by_label;
    for (size_t v = 0; v < mesh.vertex_count(); ++v)
      if (mesh.vertex_labels[v] != kUnlabeled)
        by_label[mesh.vertex_labels[v]].push_back(mesh.vertices[v]);
    std::vector<std::vector<Vec3>> out;
    out.reserve(by_label.size());
    for (auto& [lab, pts] : by_label) out.push_back(std::move(pts));
    return out;
  };
  const PlanarResult planar =
      planar_metrics(instance_points(pred), instance_points(gt), cfg.k_planes);

  EvaluationReport report;
  report.accuracy = geo.accuracy * 100.0;
  report.completion = geo.completion * 100.0;
  report.chamfer = geo.chamfer * 100.0;
  report.f1 = geo.f1;
  report.voi = seg.voi;
  report.ri = seg.ri;
  report.sc = seg.sc;
  report.planar_fidelity = planar.fidelity * 100.0;
  report.planar_accuracy = planar.accuracy * 100.0;
  report.planar_chamfer = planar.chamfer * 100.0;
  return report;
}

}  // namespace planes3d
