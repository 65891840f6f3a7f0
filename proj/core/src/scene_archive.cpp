#include "planes3d/scene_archive.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

static_assert(std::endian::native == std::endian::little,
              "scene archive binary IO assumes a little-endian host");

namespace planes3d {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[4] = {'P', 'D', 'E', 'P'};

std::string frame_path(const std::string& dir, int frame_id, const char* kind) {
  char name[64];
  std::snprintf(name, sizeof(name), "%06d.%s.bin", frame_id, kind);
  return (fs::path(dir) / "frames" / name).string();
}

void write_image_file(const std::string& path, int height, int width, const float* data,
                      size_t count) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("scene archive: cannot open " + path);
  os.write(kMagic, 4);
  const uint32_t h = height, w = width;
  os.write(reinterpret_cast<const char*>(&h), 4);
  os.write(reinterpret_cast<const char*>(&w), 4);
  os.write(reinterpret_cast<const char*>(data), count * sizeof(float));
  if (!os) throw std::runtime_error("scene archive: write failed for " + path);
}

std::vector<float> read_image_file(const std::string& path, int channels, int& height,
                                   int& width) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("scene archive: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("scene archive: bad magic in " + path);
  uint32_t h = 0, w = 0;
  is.read(reinterpret_cast<char*>(&h), 4);
  is.read(reinterpret_cast<char*>(&w), 4);
  if (!is || h == 0 || w == 0 || h > (1u << 20) || w > (1u << 20))
    throw std::runtime_error("scene archive: bad header in " + path);
  std::vector<float> data(static_cast<size_t>(h) * w * channels);
  is.read(reinterpret_cast<char*>(data.data()), data.size() * sizeof(float));
  if (!is) throw std::runtime_error("scene archive: truncated payload in " + path);
  height = static_cast<int>(h);
  width = static_cast<int>(w);
  return data;
}

}  // namespace

void write_scene(const std::string& dir, const SceneData& scene) {
  fs::create_directories(fs::path(dir) / "frames");

  {
    std::ofstream os(fs::path(dir) / "intrinsics.txt");
    if (!os) throw std::runtime_error("scene archive: cannot write intrinsics.txt");
    char buf[64];
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        std::snprintf(buf, sizeof(buf), "%.17g%c", scene.intrinsics(r, c), c == 2 ? '\n' : ' ');
        os << buf;
      }
    }
  }

  std::ofstream poses(fs::path(dir) / "poses.txt");
  if (!poses) throw std::runtime_error("scene archive: cannot write poses.txt");
  for (const Keyframe& kf : scene.frames) {
    char buf[64];
    poses << kf.frame_id;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) {
        std::snprintf(buf, sizeof(buf), " %.17g", kf.pose.camera_to_world(r, c));
        poses << buf;
      }
    poses << '\n';

    const int h = kf.depth.height, w = kf.depth.width;
    if (kf.planar_prob.height != h || kf.planar_prob.width != w ||
        kf.embeddings.height != h || kf.embeddings.width != w)
      throw std::runtime_error("scene archive: frame image sizes disagree");
    write_image_file(frame_path(dir, kf.frame_id, "depth"), h, w, kf.depth.data.data(),
                     kf.depth.size());
    write_image_file(frame_path(dir, kf.frame_id, "prob"), h, w, kf.planar_prob.data.data(),
                     kf.planar_prob.size());
    std::vector<float> emb(static_cast<size_t>(h) * w * 3);
    for (size_t i = 0; i < kf.embeddings.size(); ++i)
      for (int c = 0; c < 3; ++c) emb[i * 3 + c] = kf.embeddings.data[i][c];
    write_image_file(frame_path(dir, kf.frame_id, "emb"), h, w, emb.data(), emb.size());
  }
  if (!poses) throw std::runtime_error("scene archive: write failed for poses.txt");
}

Mat3 read_intrinsics(const std::string& dir) {
  std::ifstream is(fs::path(dir) / "intrinsics.txt");
  if (!is) throw std::runtime_error("scene archive: missing intrinsics.txt in " + dir);
  Mat3 k;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      if (!(is >> k(r, c))) throw std::runtime_error("scene archive: malformed intrinsics.txt");
  return k;
}

std::vector<std::pair<int, Mat4>> read_poses(const std::string& dir) {
  std::ifstream is(fs::path(dir) / "poses.txt");
  if (!is) throw std::runtime_error("scene archive: missing poses.txt in " + dir);
  std::vector<std::pair<int, Mat4>> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    int id = 0;
    Mat4 m;
    if (!(ls >> id)) throw std::runtime_error("scene archive: malformed poses.txt line: " + line);
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c)
        if (!(ls >> m(r, c)))
          throw std::runtime_error("scene archive: malformed poses.txt line: " + line);
    out.emplace_back(id, m);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

std::vector<int> list_frame_ids(const std::string& dir) {
  std::vector<int> ids;
  for (const auto& [id, pose] : read_poses(dir)) ids.push_back(id);
  return ids;
}

Keyframe read_frame(const std::string& dir, int frame_id, const Mat3& intrinsics,
                    const Mat4& camera_to_world) {
  Keyframe kf;
  kf.frame_id = frame_id;
  kf.timestamp = frame_id;
  kf.pose.intrinsics = intrinsics;
  kf.pose.camera_to_world = camera_to_world;
  if (!kf.pose.valid())
    throw std::runtime_error("scene archive: pose for frame " + std::to_string(frame_id) +
                             " is not a rigid transform");

  int h = 0, w = 0;
  auto depth = read_image_file(frame_path(dir, frame_id, "depth"), 1, h, w);
  kf.depth = DepthImage(h, w);
  kf.depth.data = std::move(depth);

  int h2 = 0, w2 = 0;
  auto prob = read_image_file(frame_path(dir, frame_id, "prob"), 1, h2, w2);
  if (h2 != h || w2 != w) throw std::runtime_error("scene archive: prob resolution mismatch");
  kf.planar_prob = Image<float>(h, w);
  kf.planar_prob.data = std::move(prob);

  auto emb = read_image_file(frame_path(dir, frame_id, "emb"), 3, h2, w2);
  if (h2 != h || w2 != w) throw std::runtime_error("scene archive: emb resolution mismatch");
  kf.embeddings = Image<Vec3f>(h, w);
  for (size_t i = 0; i < kf.embeddings.size(); ++i)
    kf.embeddings.data[i] = Vec3f(emb[i * 3], emb[i * 3 + 1], emb[i * 3 + 2]);
  return kf;
}

SceneData read_scene(const std::string& dir) {
  SceneData scene;
  scene.intrinsics = read_intrinsics(dir);
  for (const auto& [id, pose] : read_poses(dir))
    scene.frames.push_back(read_frame(dir, id, scene.intrinsics, pose));
  return scene;
}

}  // namespace planes3d
