#pragma once

#include "planes3d/geometry.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <string>

namespace planes3d {

/// Axis-aligned box mapping scene coordinates into the [-1,1]^3 cube the
/// embedding network expects.
struct SceneBox {
  Vec3 lo = -Vec3::Ones();
  Vec3 hi = Vec3::Ones();

  Vec3 normalize(const Vec3& p) const {
    return (2.0 * (p - lo).array() / (hi - lo).array() - 1.0).matrix();
  }
};

/// Coordinate network distilled per scene: it maps a 3D point to a 3D
/// embedding that is pulled together for same-plane samples and pushed apart
/// otherwise. Layout: Linear(3->48)+sin on an input pre-scaled by omega0,
/// three 128-wide sin layers, linear head to 3. Parameters live in one flat
/// vector; all math runs batched so callers can feed many points at once
/// (rows of an N x 3 matrix).
template <typename Scalar>
class EmbeddingMlp {
 public:
  using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  static constexpr int kLayerCount = 5;
  static constexpr int kIn[kLayerCount] = {3, 48, 128, 128, 128};
  static constexpr int kOut[kLayerCount] = {48, 128, 128, 128, 3};
  static constexpr double kOmega0 = 30.0;

  static constexpr int param_count() {
    int n = 0;
    for (int l = 0; l < kLayerCount; ++l) n += kOut[l] * (kIn[l] + 1);
    return n;
  }

  explicit EmbeddingMlp(uint64_t seed = 0) : params_(param_count()) {
    std::mt19937_64 rng(seed);
    int off = 0;
    for (int l = 0; l < kLayerCount; ++l) {
      // sin layers keep activations well-spread when weights scale like
      // sqrt(6/fan_in); the first layer uses 1/fan_in so that with the
      // omega0 input pre-scaling it spans spatial frequencies up to
      // omega0/fan_in, which the deeper layers then compound.
      const double bw = l == 0 ? 1.0 / kIn[l] : std::sqrt(6.0 / kIn[l]);
      const double bb = 1.0 / std::sqrt(static_cast<double>(kIn[l]));
      std::uniform_real_distribution<double> w_dist(-bw, bw), b_dist(-bb, bb);
      for (int i = 0; i < kOut[l] * kIn[l]; ++i) params_[off++] = static_cast<Scalar>(w_dist(rng));
      for (int i = 0; i < kOut[l]; ++i) params_[off++] = static_cast<Scalar>(b_dist(rng));
    }
  }

  VecX& params() { return params_; }
  const VecX& params() const { return params_; }

  /// Pre-activations z[l] and the scaled input; enough state to run backward.
  struct Activations {
    MatX input;            // N x 3, already multiplied by omega0
    MatX z[kLayerCount];   // pre-activation per layer; z[4] is the output
  };

  /// points: N x 3 in [-1,1]^3. Returns N x 3 embeddings.
  MatX forward(const MatX& points) const {
    Activations acts;
    return forward_cached(points, acts);
  }

  MatX forward_cached(const MatX& points, Activations& acts) const {
    if (points.cols() != 3) throw std::runtime_error("EmbeddingMlp: points must be N x 3");
    acts.input = points * static_cast<Scalar>(kOmega0);
    MatX h = acts.input;
    for (int l = 0; l < kLayerCount; ++l) {
      acts.z[l] = h * weight(l).transpose();
      acts.z[l].rowwise() += bias(l).transpose();
      if (l + 1 < kLayerCount) h = acts.z[l].array().sin().matrix();
    }
    return acts.z[kLayerCount - 1];
  }

  /// Accumulates dL/dparams for the cached forward pass, given dL/doutput.
  VecX backward(const Activations& acts, const MatX& d_out) const {
    VecX grad = VecX::Zero(param_count());
    MatX d = d_out;
    for (int l = kLayerCount - 1; l >= 0; --l) {
      const MatX input_act =
          l == 0 ? acts.input : MatX(acts.z[l - 1].array().sin().matrix());
      auto [woff, boff] = offsets(l);
      Eigen::Map<MatX>(grad.data() + woff, kOut[l], kIn[l]) = d.transpose() * input_act;
      Eigen::Map<VecX>(grad.data() + boff, kOut[l]) = d.colwise().sum();
      if (l > 0) d = (d * weight(l)).cwiseProduct(acts.z[l - 1].array().cos().matrix());
    }
    return grad;
  }

  /// Single-point convenience wrapper.
  Eigen::Matrix<Scalar, 3, 1> embed(const Eigen::Matrix<Scalar, 3, 1>& p) const {
    MatX pts(1, 3);
    pts.row(0) = p.transpose();
    return forward(pts).row(0).transpose();
  }

  Eigen::Map<const MatX> weight(int l) const {
    return {params_.data() + offsets(l).first, kOut[l], kIn[l]};
  }
  Eigen::Map<const VecX> bias(int l) const {
    return {params_.data() + offsets(l).second, kOut[l]};
  }

  static constexpr std::pair<int, int> offsets(int layer) {
    int off = 0;
    for (int l = 0; l < layer; ++l) off += kOut[l] * (kIn[l] + 1);
    return {off, off + kOut[layer] * kIn[layer]};
  }

 private:
  VecX params_;
};

/// Contrastive loss summed over pairs: pull pairs contribute the embedding
/// distance, push pairs the hinge max(0, margin - distance). Kinks (zero
/// distance, hinge boundary) take subgradient zero. Returns the loss;
/// when grad is non-null it receives dL/dparams.
template <typename Scalar>
Scalar pair_loss_and_grad(const EmbeddingMlp<Scalar>& mlp,
                          const typename EmbeddingMlp<Scalar>::MatX& points,
                          const std::vector<std::pair<int, int>>& pairs,
                          const std::vector<uint8_t>& pull, Scalar margin,
                          typename EmbeddingMlp<Scalar>::VecX* grad) {
  using MatX = typename EmbeddingMlp<Scalar>::MatX;
  if (pairs.size() != pull.size())
    throw std::runtime_error("pair_loss_and_grad: pairs/pull size mismatch");
  typename EmbeddingMlp<Scalar>::Activations acts;
  const MatX y = mlp.forward_cached(points, acts);
  MatX d_out = MatX::Zero(y.rows(), y.cols());
  Scalar loss = 0;
  for (size_t t = 0; t < pairs.size(); ++t) {
    const auto [i, j] = pairs[t];
    const Eigen::Matrix<Scalar, 1, 3> diff = y.row(i) - y.row(j);
    const Scalar dist = diff.norm();
    if (pull[t]) {
      loss += dist;
      if (dist > Scalar(0)) {
        const Eigen::Matrix<Scalar, 1, 3> g = diff / dist;
        d_out.row(i) += g;
        d_out.row(j) -= g;
      }
    } else if (margin - dist > Scalar(0)) {
      loss += margin - dist;
      if (dist > Scalar(0)) {
        const Eigen::Matrix<Scalar, 1, 3> g = diff / dist;
        d_out.row(i) -= g;
        d_out.row(j) += g;
      }
    }
  }
  if (grad) *grad = mlp.backward(acts, d_out);
  return loss;
}

template <typename Scalar>
struct AdamState {
  using VecX = typename EmbeddingMlp<Scalar>::VecX;
  VecX m = VecX::Zero(EmbeddingMlp<Scalar>::param_count());
  VecX v = VecX::Zero(EmbeddingMlp<Scalar>::param_count());
  int64_t step = 0;
  Scalar lr = Scalar(1e-3);
  Scalar beta1 = Scalar(0.9);
  Scalar beta2 = Scalar(0.999);
  Scalar eps = Scalar(1e-8);
};

template <typename Scalar>
void adam_step(EmbeddingMlp<Scalar>& mlp, const typename EmbeddingMlp<Scalar>::VecX& grad,
               AdamState<Scalar>& state) {
  state.step += 1;
  state.m = state.beta1 * state.m + (Scalar(1) - state.beta1) * grad;
  state.v = (state.beta2 * state.v.array() +
             (Scalar(1) - state.beta2) * grad.array().square()).matrix();
  const Scalar c1 = Scalar(1) - std::pow(state.beta1, Scalar(state.step));
  const Scalar c2 = Scalar(1) - std::pow(state.beta2, Scalar(state.step));
  mlp.params().array() -=
      state.lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + state.eps);
}

using SceneEmbeddingMlp = EmbeddingMlp<float>;

/// Checkpoint: 'PMLP' magic, u32 version, u32 parameter count, f32 params.
inline void save_checkpoint(const std::string& path, const SceneEmbeddingMlp& mlp) {
  static_assert(std::endian::native == std::endian::little);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_checkpoint: cannot open " + path);
  os.write("PMLP", 4);
  const uint32_t version = 1, count = SceneEmbeddingMlp::param_count();
  os.write(reinterpret_cast<const char*>(&version), 4);
  os.write(reinterpret_cast<const char*>(&count), 4);
  os.write(reinterpret_cast<const char*>(mlp.params().data()), count * sizeof(float));
  if (!os) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

inline SceneEmbeddingMlp load_checkpoint(const std::string& path) {
  static_assert(std::endian::native == std::endian::little);
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_checkpoint: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "PMLP", 4) != 0)
    throw std::runtime_error("load_checkpoint: bad magic in " + path);
  uint32_t version = 0, count = 0;
  is.read(reinterpret_cast<char*>(&version), 4);
  is.read(reinterpret_cast<char*>(&count), 4);
  if (!is || version != 1) throw std::runtime_error("load_checkpoint: unsupported version");
  if (count != static_cast<uint32_t>(SceneEmbeddingMlp::param_count()))
    throw std::runtime_error("load_checkpoint: parameter count mismatch");
  SceneEmbeddingMlp mlp(0);
  is.read(reinterpret_cast<char*>(mlp.params().data()), count * sizeof(float));
  if (!is) throw std::runtime_error("load_checkpoint: truncated file " + path);
  return mlp;
}

}  // namespace planes3d
