#include "planes3d/synth.hpp"

#include "planes3d/mesh_io.hpp"

#include <random>
#include <unordered_map>

namespace planes3d {

namespace {

Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  while (true) {
    const double w = gauss(rng), x = gauss(rng), y = gauss(rng), z = gauss(rng);
    Eigen::Quaterniond q(w, x, y, z);
    if (q.norm() < 1e-6) continue;
    return q.normalized().toRotationMatrix();
  }
}

}  // namespace

Mat4 look_at(const Vec3& eye, const Vec3& target) {
  const Vec3 forward = target - eye;
  if (forward.norm() < 1e-9) throw std::invalid_argument("look_at: eye equals target");
  const Vec3 z = forward.normalized();
  const Vec3 x_raw = z.cross(Vec3::UnitZ());
  if (x_raw.norm() < 0.04) throw std::invalid_argument("look_at: view direction too vertical");
  const Vec3 x = x_raw.normalized();
  const Vec3 y = z.cross(x);  // world-down for an upright camera
  Mat4 m = Mat4::Identity();
  m.block<3, 1>(0, 0) = x;
  m.block<3, 1>(0, 1) = y;
  m.block<3, 1>(0, 2) = z;
  m.block<3, 1>(0, 3) = eye;
  return m;
}

std::vector<Mat4> orbit_trajectory(const Vec3& center, double radius, int frames,
                                   double pitch_radians) {
  if (frames < 1) throw std::invalid_argument("orbit_trajectory: need at least one frame");
  std::vector<Mat4> out;
  out.reserve(frames);
  for (int i = 0; i < frames; ++i) {
    const double a = 2.0 * M_PI * i / frames;
    const Vec3 eye = center + radius * Vec3(std::cos(a), std::sin(a), 0.0);
    const double elev = ((i % 3) - 1) * pitch_radians;
    const Vec3 target = center + Vec3(0, 0, radius * std::tan(elev));
    out.push_back(look_at(eye, target));
  }
  return out;
}

std::vector<Vec3f> draw_anchors(int count, uint64_t seed, double radius, double min_separation) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Vec3f> anchors;
  anchors.reserve(count);
  int attempts = 0;
  while (static_cast<int>(anchors.size()) < count) {
    if (++attempts > 100000) throw std::runtime_error("draw_anchors: rejection sampling stalled");
    Vec3 p(gauss(rng), gauss(rng), gauss(rng));
    if (p.norm() < 1e-6) continue;
    const Vec3f cand = (radius * p.normalized()).cast<float>();
    bool ok = true;
    for (const Vec3f& a : anchors)
      if ((a - cand).norm() <= min_separation) {
        ok = false;
        break;
      }
    if (ok) anchors.push_back(cand);
  }
  return anchors;
}

SyntheticScene make_box_room(const Vec3& extent, int overlays, uint64_t seed, bool clutter) {
  if (extent.minCoeff() <= 0) throw std::invalid_argument("make_box_room: extent must be positive");
  if (overlays < 0 || overlays > 4)
    throw std::invalid_argument("make_box_room: supports 0..4 overlays");
  const double hx = extent.x() / 2, hy = extent.y() / 2, h = extent.z();

  SyntheticScene scene;
  scene.seed = seed;
  scene.rotation_seed = seed + 1;
  auto rect = [](int id, Vec3 c, Vec3 u, Vec3 v, double half_u, double half_v, int prio = 0,
                 bool planar = true) {
    return SceneRect{id, c, u, v, half_u, half_v, prio, planar};
  };
  const Vec3 X = Vec3::UnitX(), Y = Vec3::UnitY(), Z = Vec3::UnitZ();
  // Inward-facing: floor, ceiling, then walls at -x, +x, -y, +y.
  scene.rects.push_back(rect(0, {0, 0, 0}, X, Y, hx, hy));
  scene.rects.push_back(rect(1, {0, 0, h}, Y, X, hy, hx));
  scene.rects.push_back(rect(2, {-hx, 0, h / 2}, Y, Z, hy, h / 2));
  scene.rects.push_back(rect(3, {hx, 0, h / 2}, Z, Y, h / 2, hy));
  scene.rects.push_back(rect(4, {0, -hy, h / 2}, Z, X, h / 2, hx));
  scene.rects.push_back(rect(5, {0, hy, h / 2}, X, Z, hx, h / 2));

  // Pictures: coplanar with their wall, win ties through priority.
  const double pu = hy / 2, pv = h / 4;
  const SceneRect pictures[4] = {
      rect(0, {-hx, 0, h / 2}, Y, Z, pu, pv, 1),
      rect(0, {0, hy, h / 2}, X, Z, hx / 2, pv, 1),
      rect(0, {hx, 0, h / 2}, Z, Y, pv, pu, 1),
      rect(0, {0, -hy, h / 2}, Z, X, pv, hx / 2, 1),
  };
  int next_id = 6;
  for (int i = 0; i < overlays; ++i) {
    SceneRect p = pictures[i];
    p.instance = next_id++;
    scene.rects.push_back(p);
  }
  scene.instance_count = next_id;

  int anchor_count = next_id;
  if (clutter) {
    const int id = anchor_count++;
    const Vec3 c(0.45 * hx, -0.35 * hy, 0.35 * h);
    const Vec3 n = Vec3(1, 1, 1).normalized();
    const Vec3 u = n.cross(Z).normalized();
    const Vec3 v = n.cross(u);
    // Thin two-sided slab so fusion sees consistent signs from every side.
    scene.rects.push_back(rect(id, c + 0.01 * n, u, v, 0.35, 0.25, 0, false));
    scene.rects.push_back(rect(id, c - 0.01 * n, v, u, 0.25, 0.35, 0, false));
  }
  scene.anchors = draw_anchors(anchor_count, mix_seed(seed, 0));

  const double fx = 40, fy = 40;
  scene.intrinsics << fx, 0, (scene.width - 1) / 2.0, 0, fy, (scene.height - 1) / 2.0, 0, 0, 1;
  scene.trajectory =
      orbit_trajectory({0, 0, h / 2}, 0.53 * std::min(hx, hy), 30, 35.0 * M_PI / 180);
  return scene;
}

SyntheticScene make_preset(const std::string& name, uint64_t seed) {
  const double deg = M_PI / 180;
  if (name == "box6") return make_box_room({3, 3, 2.4}, 0, seed, true);
  if (name == "picture-wall") {
    SyntheticScene scene = make_box_room({3, 3, 2.4}, 3, seed);
    scene.trajectory = orbit_trajectory({0, 0, 1.2}, 0.8, 18, 35 * deg);
    return scene;
  }
  if (name == "two-rooms") {
    SyntheticScene scene = make_box_room({6, 3, 2.4}, 0, seed);
    const Vec3 Y = Vec3::UnitY(), Z = Vec3::UnitZ();
    // Divider slab at x = +-0.05, spanning y in [-1.5, 0.75] (doorway above)
    // and full height; one inward face per room, same thin-slab trick as the
    // clutter rect.
    scene.rects.push_back({6, {-0.05, -0.375, 1.2}, Z, Y, 1.2, 1.125, 0, true});
    scene.rects.push_back({7, {0.05, -0.375, 1.2}, Y, Z, 1.125, 1.2, 0, true});
    scene.instance_count = 8;
    scene.anchors = draw_anchors(8, mix_seed(seed, 0));

    std::vector<Mat4> traj = orbit_trajectory({-1.6, 0, 1.2}, 0.8, 12, 30 * deg);
    for (int i = 0; i < 6; ++i) {
      const Vec3 eye(-1.0 + 0.4 * i, 1.1, 1.3);
      traj.push_back(look_at(eye, eye + Vec3(1.5, -1.0, -0.15)));
    }
    const auto orbit_b = orbit_trajectory({1.6, 0, 1.2}, 0.8, 12, 30 * deg);
    traj.insert(traj.end(), orbit_b.begin(), orbit_b.end());
    scene.trajectory = std::move(traj);
    return scene;
  }
  throw std::invalid_argument("make_preset: unknown preset '" + name + "'");
}

Keyframe render_keyframe(const SyntheticScene& scene, int frame, Image<int>* instance_ids) {
  Keyframe kf;
  kf.frame_id = frame;
  kf.timestamp = frame;
  kf.pose.intrinsics = scene.intrinsics;
  kf.pose.camera_to_world = scene.trajectory.at(frame);
  kf.depth = Image<float>(scene.height, scene.width, 0.0f);
  kf.planar_prob = Image<float>(scene.height, scene.width, 0.0f);
  kf.embeddings = Image<Vec3f>(scene.height, scene.width, Vec3f::Zero());
  if (instance_ids) *instance_ids = Image<int>(scene.height, scene.width, -1);

  struct Cached {
    Vec3 n;
    double off;
    const SceneRect* rect;
  };
  std::vector<Cached> rects;
  rects.reserve(scene.rects.size());
  for (const SceneRect& r : scene.rects) {
    if (r.instance < 0 || r.instance >= static_cast<int>(scene.anchors.size()))
      throw std::runtime_error("render_keyframe: rect instance without anchor");
    rects.push_back({r.normal(), r.plane().offset, &r});
  }

  std::mt19937_64 noise_rng(mix_seed(scene.seed, 1 + frame));
  std::mt19937_64 rot_rng(mix_seed(scene.rotation_seed, 1 + frame));
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::Matrix3f q = Eigen::Matrix3f::Identity();
  if (scene.noise.rotate_embeddings) q = random_rotation(rot_rng).cast<float>();

  const Mat3 rot = kf.pose.rotation();
  const Vec3 origin = kf.pose.translation();
  const double fx = scene.intrinsics(0, 0), fy = scene.intrinsics(1, 1);
  const double cx = scene.intrinsics(0, 2), cy = scene.intrinsics(1, 2);

  for (int v = 0; v < scene.height; ++v)
    for (int u = 0; u < scene.width; ++u) {
      // Unit z in camera frame, so the ray parameter is the depth value.
      const Vec3 dir = rot * Vec3((u - cx) / fx, (v - cy) / fy, 1.0);
      double best_t = std::numeric_limits<double>::infinity();
      int best_pri = std::numeric_limits<int>::min();
      const SceneRect* best = nullptr;
      for (const Cached& c : rects) {
        const double denom = c.n.dot(dir);
        if (denom >= -1e-12) continue;  // back face or parallel
        const double t = (c.off - c.n.dot(origin)) / denom;
        if (t <= 1e-6 || t > best_t + 1e-9) continue;
        const Vec3 local = origin + t * dir - c.rect->center;
        if (std::abs(local.dot(c.rect->u_axis)) > c.rect->half_u + 1e-9) continue;
        if (std::abs(local.dot(c.rect->v_axis)) > c.rect->half_v + 1e-9) continue;
        if (t < best_t - 1e-9 || c.rect->priority > best_pri) {
          best_t = t;
          best_pri = c.rect->priority;
          best = c.rect;
        }
      }
      if (!best) continue;
      kf.depth(v, u) = static_cast<float>(
          best_t + scene.noise.depth_sigma * (scene.noise.depth_sigma > 0 ? gauss(noise_rng) : 0));
      kf.planar_prob(v, u) = best->planar ? 1.0f : 0.1f;
      Vec3f e = scene.anchors[best->instance];
      if (scene.noise.embedding_sigma > 0) {
        const Vec3 eta(gauss(noise_rng), gauss(noise_rng), gauss(noise_rng));
        e += (scene.noise.embedding_sigma * eta).cast<float>();
      }
      if (scene.noise.rotate_embeddings) e = q * e;
      kf.embeddings(v, u) = e;
      if (instance_ids) (*instance_ids)(v, u) = best->instance;
    }
  return kf;
}

SceneData render_scene(const SyntheticScene& scene) {
  SceneData data;
  data.intrinsics = scene.intrinsics;
  data.frames.reserve(scene.trajectory.size());
  for (int f = 0; f < static_cast<int>(scene.trajectory.size()); ++f)
    data.frames.push_back(render_keyframe(scene, f));
  return data;
}

TriMesh ground_truth_mesh(const SyntheticScene& scene, double cell) {
  if (cell <= 0) throw std::invalid_argument("ground_truth_mesh: cell must be positive");
  TriMesh out;
  for (const SceneRect& r : scene.rects) {
    if (!r.planar) continue;
    const double span_u = 2 * r.half_u - cell, span_v = 2 * r.half_v - cell;
    if (span_u <= 0 || span_v <= 0)
      throw std::invalid_argument("ground_truth_mesh: cell too coarse for a rect");
    const int nu = std::max(1, static_cast<int>(std::lround(span_u / cell)));
    const int nv = std::max(1, static_cast<int>(std::lround(span_v / cell)));
    const double su = span_u / nu, sv = span_v / nv;
    const Vec3 n = r.normal();

    auto at = [&](double a, double b) {
      return r.center + (a - r.half_u + cell / 2) * r.u_axis + (b - r.half_v + cell / 2) * r.v_axis;
    };
    auto punched = [&](const Vec3& p) {
      for (const SceneRect& o : scene.rects) {
        if (o.priority <= r.priority) continue;
        if (o.normal().dot(n) < 0.999) continue;
        if (std::abs(o.plane().signed_distance(p)) > 1e-6) continue;
        const Vec3 d = p - o.center;
        if (std::abs(d.dot(o.u_axis)) <= o.half_u + cell / 2 &&
            std::abs(d.dot(o.v_axis)) <= o.half_v + cell / 2)
          return true;
      }
      return false;
    };

    std::unordered_map<int64_t, int> vert_of;  // local grid node -> mesh vertex
    auto emit = [&](int i, int j) {
      const int64_t key = static_cast<int64_t>(i) * (nv + 2) + j;
      const auto it = vert_of.find(key);
      if (it != vert_of.end()) return it->second;
      const int idx = static_cast<int>(out.vertices.size());
      out.vertices.push_back(at(i * su, j * sv));
      out.vertex_normals.push_back(n);
      out.vertex_labels.push_back(r.instance);
      vert_of.emplace(key, idx);
      return idx;
    };

    for (int i = 0; i < nu; ++i)
      for (int j = 0; j < nv; ++j) {
        if (punched(at((i + 0.5) * su, (j + 0.5) * sv))) continue;
        const int a = emit(i, j), b = emit(i + 1, j);
        const int c = emit(i + 1, j + 1), d = emit(i, j + 1);
        out.faces.push_back({a, b, c});
        out.faces.push_back({a, c, d});
      }
  }
  return out;
}

void write_synthetic_scene(const SyntheticScene& scene, const std::filesystem::path& dir) {
  write_scene(dir.string(), render_scene(scene));
  write_ply((dir / "gt_mesh.ply").string(), ground_truth_mesh(scene));
}

}  // namespace planes3d
