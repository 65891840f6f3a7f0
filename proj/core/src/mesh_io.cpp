#include "planes3d/mesh_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

static_assert(std::endian::native == std::endian::little,
              "PLY binary IO assumes a little-endian host");

namespace planes3d {

namespace {

std::array<uint8_t, 3> hsv_to_rgb(double h, double s, double v) {
  const double c = v * s;
  const double hp = h / 60.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  if (hp < 1) { r = c; g = x; }
  else if (hp < 2) { r = x; g = c; }
  else if (hp < 3) { g = c; b = x; }
  else if (hp < 4) { g = x; b = c; }
  else if (hp < 5) { r = x; b = c; }
  else { r = c; b = x; }
  const double m = v - c;
  auto to8 = [m](double t) { return static_cast<uint8_t>(std::lround((t + m) * 255.0)); };
  return {to8(r), to8(g), to8(b)};
}

const std::array<std::array<uint8_t, 3>, 64>& palette() {
  static const auto table = [] {
    std::array<std::array<uint8_t, 3>, 64> t{};
    for (int i = 0; i < 64; ++i) {
      // Golden-ratio hue stepping keeps consecutive ids visually distinct.
      const double hue = std::fmod(i * 0.61803398875 * 360.0, 360.0);
      const double value = (i % 2 == 0) ? 0.95 : 0.72;
      t[i] = hsv_to_rgb(hue, 0.68, value);
    }
    return t;
  }();
  return table;
}

template <typename T>
void write_raw(std::ostream& os, const T& value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::istream& is) {
  T value{};
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  return value;
}

enum class PlyType { kFloat32, kFloat64, kInt8, kUint8, kInt16, kUint16, kInt32, kUint32 };

PlyType parse_type(const std::string& name) {
  if (name == "float" || name == "float32") return PlyType::kFloat32;
  if (name == "double" || name == "float64") return PlyType::kFloat64;
  if (name == "char" || name == "int8") return PlyType::kInt8;
  if (name == "uchar" || name == "uint8") return PlyType::kUint8;
  if (name == "short" || name == "int16") return PlyType::kInt16;
  if (name == "ushort" || name == "uint16") return PlyType::kUint16;
  if (name == "int" || name == "int32") return PlyType::kInt32;
  if (name == "uint" || name == "uint32") return PlyType::kUint32;
  throw std::runtime_error("read_ply: unsupported property type " + name);
}

double read_scalar_binary(std::istream& is, PlyType type) {
  switch (type) {
    case PlyType::kFloat32: return read_raw<float>(is);
    case PlyType::kFloat64: return read_raw<double>(is);
    case PlyType::kInt8: return read_raw<int8_t>(is);
    case PlyType::kUint8: return read_raw<uint8_t>(is);
    case PlyType::kInt16: return read_raw<int16_t>(is);
    case PlyType::kUint16: return read_raw<uint16_t>(is);
    case PlyType::kInt32: return read_raw<int32_t>(is);
    case PlyType::kUint32: return read_raw<uint32_t>(is);
  }
  throw std::logic_error("read_scalar_binary: unreachable");
}

struct PlyProperty {
  std::string name;
  PlyType type = PlyType::kFloat32;
  bool is_list = false;
  PlyType count_type = PlyType::kUint8;
};

struct PlyElement {
  std::string name;
  size_t count = 0;
  std::vector<PlyProperty> properties;
};

}  // namespace

std::array<uint8_t, 3> label_color(int label) {
  if (label < 0) return {128, 128, 128};
  return palette()[label % 64];
}

void write_ply(const std::string& path, const TriMesh& mesh) {
  mesh.check_valid();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_ply: cannot open " + path);

  const bool normals = mesh.has_normals();
  const bool labels = mesh.has_labels();

  os << "ply\nformat binary_little_endian 1.0\n";
  os << "element vertex " << mesh.vertex_count() << "\n";
  os << "property float x\nproperty float y\nproperty float z\n";
  if (normals) os << "property float nx\nproperty float ny\nproperty float nz\n";
  if (labels) {
    os << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    os << "property int plane_id\n";
  }
  os << "element face " << mesh.face_count() << "\n";
  os << "property list uchar int vertex_indices\n";
  os << "end_header\n";

  for (size_t i = 0; i < mesh.vertex_count(); ++i) {
    for (int k = 0; k < 3; ++k) write_raw(os, static_cast<float>(mesh.vertices[i][k]));
    if (normals)
      for (int k = 0; k < 3; ++k) write_raw(os, static_cast<float>(mesh.vertex_normals[i][k]));
    if (labels) {
      const auto rgb = label_color(mesh.vertex_labels[i]);
      for (uint8_t c : rgb) write_raw(os, c);
      write_raw(os, static_cast<int32_t>(mesh.vertex_labels[i]));
    }
  }
  for (const auto& f : mesh.faces) {
    write_raw(os, static_cast<uint8_t>(3));
    for (int idx : f) write_raw(os, static_cast<int32_t>(idx));
  }
  if (!os) throw std::runtime_error("write_ply: write failed for " + path);
}

TriMesh read_ply(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_ply: cannot open " + path);

  std::string line;
  std::getline(is, line);
  if (line != "ply" && line != "ply\r") throw std::runtime_error("read_ply: not a PLY file");

  bool binary = false;
  std::vector<PlyElement> elements;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "comment" || word == "obj_info") continue;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt == "binary_little_endian") binary = true;
      else if (fmt == "ascii") binary = false;
      else throw std::runtime_error("read_ply: unsupported format " + fmt);
    } else if (word == "element") {
      PlyElement el;
      ls >> el.name >> el.count;
      elements.push_back(el);
    } else if (word == "property") {
      if (elements.empty()) throw std::runtime_error("read_ply: property before element");
      PlyProperty prop;
      std::string type_name;
      ls >> type_name;
      if (type_name == "list") {
        prop.is_list = true;
        std::string count_name, value_name;
        ls >> count_name >> value_name >> prop.name;
        prop.count_type = parse_type(count_name);
        prop.type = parse_type(value_name);
      } else {
        prop.type = parse_type(type_name);
        ls >> prop.name;
      }
      elements.back().properties.push_back(prop);
    } else if (word == "end_header") {
      break;
    } else if (!word.empty()) {
      throw std::runtime_error("read_ply: unexpected header line: " + line);
    }
  }

  TriMesh mesh;
  std::istringstream ascii_row;
  auto next_scalar = [&](PlyType type) -> double {
    if (binary) return read_scalar_binary(is, type);
    double v = 0;
    if (!(ascii_row >> v)) throw std::runtime_error("read_ply: ascii row underflow");
    return v;
  };

  for (const auto& el : elements) {
    const bool is_vertex = el.name == "vertex";
    const bool is_face = el.name == "face";
    for (size_t i = 0; i < el.count; ++i) {
      if (!binary) {
        if (!std::getline(is, line)) throw std::runtime_error("read_ply: truncated ascii body");
        ascii_row = std::istringstream(line);
      }
      Vec3 pos = Vec3::Zero(), normal = Vec3::Zero();
      bool has_normal = false;
      int label = kUnlabeled;
      bool has_label = false;
      for (const auto& prop : el.properties) {
        if (prop.is_list) {
          const int n = static_cast<int>(next_scalar(prop.count_type));
          std::vector<double> values(n);
          for (double& v : values) v = next_scalar(prop.type);
          if (is_face && (prop.name == "vertex_indices" || prop.name == "vertex_index")) {
            if (n != 3) throw std::runtime_error("read_ply: only triangle faces supported");
            mesh.faces.push_back({static_cast<int>(values[0]), static_cast<int>(values[1]),
                                  static_cast<int>(values[2])});
          }
          continue;
        }
        const double v = next_scalar(prop.type);
        if (!is_vertex) continue;
        if (prop.name == "x") pos.x() = v;
        else if (prop.name == "y") pos.y() = v;
        else if (prop.name == "z") pos.z() = v;
        else if (prop.name == "nx") { normal.x() = v; has_normal = true; }
        else if (prop.name == "ny") { normal.y() = v; has_normal = true; }
        else if (prop.name == "nz") { normal.z() = v; has_normal = true; }
        else if (prop.name == "plane_id") { label = static_cast<int>(v); has_label = true; }
      }
      if (is_vertex) {
        mesh.vertices.push_back(pos);
        if (has_normal) mesh.vertex_normals.push_back(normal);
        if (has_label) mesh.vertex_labels.push_back(label);
      }
    }
  }
  if (!is && binary) throw std::runtime_error("read_ply: truncated binary body");
  mesh.check_valid();
  return mesh;
}

void write_obj(const std::string& path, const TriMesh& mesh) {
  mesh.check_valid();
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_obj: cannot open " + path);
  os << "# planes3d mesh, " << mesh.vertex_count() << " vertices, " << mesh.face_count()
     << " faces\n";
  const bool labels = mesh.has_labels();
  const bool normals = mesh.has_normals();
  char buf[256];
  for (size_t i = 0; i < mesh.vertex_count(); ++i) {
    const Vec3& p = mesh.vertices[i];
    if (labels) {
      const auto rgb = label_color(mesh.vertex_labels[i]);
      std::snprintf(buf, sizeof(buf), "v %.9g %.9g %.9g %.6g %.6g %.6g\n", p.x(), p.y(), p.z(),
                    rgb[0] / 255.0, rgb[1] / 255.0, rgb[2] / 255.0);
    } else {
      std::snprintf(buf, sizeof(buf), "v %.9g %.9g %.9g\n", p.x(), p.y(), p.z());
    }
    os << buf;
  }
  if (normals) {
    for (const Vec3& n : mesh.vertex_normals) {
      std::snprintf(buf, sizeof(buf), "vn %.9g %.9g %.9g\n", n.x(), n.y(), n.z());
      os << buf;
    }
  }
  for (const auto& f : mesh.faces) {
    if (normals)
      os << "f " << f[0] + 1 << "//" << f[0] + 1 << ' ' << f[1] + 1 << "//" << f[1] + 1 << ' '
         << f[2] + 1 << "//" << f[2] + 1 << '\n';
    else
      os << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  }
  if (!os) throw std::runtime_error("write_obj: write failed for " + path);
}

}  // namespace planes3d
